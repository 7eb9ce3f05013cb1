// Live preview of how the attendee phrase will be normalized; mirrors
// the server lexicon (conservative estimates, ranges keep the low bound).

const LEXICON: [string, number][] = [
  ["tens of thousands", 10000],
  ["a couple hundred", 200],
  ["a dozen", 10],
  ["thousands", 1000],
  ["hundreds", 100],
  ["dozens", 20],
];

const RANGE = /(\d[\d,]*)\s*(?:[-–—]|to)\s*(\d[\d,]*)/;
const NUMBER = /\d[\d,]*/;

export function parseAttendeePhrase(phrase: string): number | null {
  const text = phrase.toLowerCase();
  const range = RANGE.exec(text);
  if (range) {
    const low = parseInt(range[1].replace(/,/g, ""), 10);
    const high = parseInt(range[2].replace(/,/g, ""), 10);
    return Math.min(low, high);
  }
  const number = NUMBER.exec(text);
  if (number) {
    return parseInt(number[0].replace(/,/g, ""), 10);
  }
  for (const [needle, count] of LEXICON) {
    if (new RegExp(`\\b${needle}\\b`).test(text)) {
      return count;
    }
  }
  return null;
}

import type { DiffPayload } from "./types";

// Renders a word diff: equal runs plain, inserted tokens highlighted,
// deleted tokens struck. Reading only the non-deleted tokens gives the
// article text back.

function isValidPayload(diff: unknown): diff is DiffPayload {
  if (typeof diff !== "object" || diff === null) return false;
  const ops = (diff as DiffPayload).ops;
  if (!Array.isArray(ops)) return false;
  return ops.every(
    (op) =>
      op !== null &&
      typeof op === "object" &&
      ["equal", "insert", "delete"].includes(op.op) &&
      Array.isArray(op.tokens) &&
      op.tokens.every((t) => typeof t === "string"),
  );
}

export function renderDiff(diff: unknown, fallbackText: string): HTMLElement {
  const container = document.createElement("div");
  container.className = "diff-view";
  if (!isValidPayload(diff)) {
    const panel = document.createElement("div");
    panel.className = "error-panel";
    panel.textContent = "Could not render the diff payload; showing plain text.";
    const raw = document.createElement("p");
    raw.className = "diff-fallback";
    raw.textContent = fallbackText;
    container.append(panel, raw);
    return container;
  }
  for (const op of diff.ops) {
    const text = op.tokens.join(" ");
    let node: HTMLElement;
    if (op.op === "insert") {
      node = document.createElement("ins");
      node.className = "diff-insert";
    } else if (op.op === "delete") {
      node = document.createElement("del");
      node.className = "diff-delete";
    } else {
      node = document.createElement("span");
      node.className = "diff-equal";
    }
    node.textContent = text;
    container.appendChild(node);
    container.appendChild(document.createTextNode(" "));
  }
  return container;
}

// Tokens of the rendered article after applying the diff: equal and
// inserted runs in order, deletions skipped.
export function renderedTokens(view: HTMLElement): string[] {
  const tokens: string[] = [];
  view.querySelectorAll<HTMLElement>(".diff-equal, .diff-insert").forEach((node) => {
    const text = node.textContent ?? "";
    for (const token of text.split(/\s+/)) {
      if (token) tokens.push(token);
    }
  });
  return tokens;
}

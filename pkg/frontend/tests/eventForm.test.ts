import { beforeEach, describe, expect, it } from "vitest";

import { createEventForm } from "../src/eventForm";
import type { EventInput, TaxonomyPayload, TaxonomyTag } from "../src/types";
import { fixture } from "./helpers";

const taxonomy: TaxonomyTag[] = fixture<TaxonomyPayload>("taxonomy.json").tags;

function checkbox(form: HTMLElement, name: string): HTMLInputElement {
  const box = [...form.querySelectorAll<HTMLInputElement>("input[type=checkbox]")].find(
    (input) => input.value === name,
  );
  if (!box) throw new Error(`no checkbox for ${name}`);
  return box;
}

describe("event form gating", () => {
  let submitted: EventInput[];
  let form: ReturnType<typeof createEventForm>;

  beforeEach(() => {
    submitted = [];
    form = createEventForm(taxonomy, (event) => submitted.push(event));
    form.setDate("2021-01-09");
  });

  it("starts unsubmittable", () => {
    const fresh = createEventForm(taxonomy, () => {});
    expect(fresh.isSubmittable()).toBe(false);
  });

  it("category alone is not enough", () => {
    form.selectTag("Guns");
    expect(form.isSubmittable()).toBe(false);
  });

  it("position alone is not enough", () => {
    form.selectTag("For greater gun control");
    expect(form.isSubmittable()).toBe(false);
  });

  it("category plus position enables submission", () => {
    form.selectTag("Guns");
    form.selectTag("For greater gun control");
    expect(form.isSubmittable()).toBe(true);
  });

  it("requires a date even with valid tags", () => {
    const fresh = createEventForm(taxonomy, () => {});
    fresh.selectTag("Guns");
    fresh.selectTag("For greater gun control");
    expect(fresh.isSubmittable()).toBe(false);
    fresh.setDate("2021-01-09");
    expect(fresh.isSubmittable()).toBe(true);
  });

  it("submit event does nothing while unsubmittable", () => {
    form.selectTag("Guns");
    form.element.dispatchEvent(new Event("submit", { cancelable: true }));
    expect(submitted).toEqual([]);
  });
});

describe("opposite position exclusion", () => {
  it("selecting a position disables its opposite", () => {
    const form = createEventForm(taxonomy, () => {});
    form.selectTag("For greater gun control");
    expect(checkbox(form.element, "Against greater gun control").disabled).toBe(true);
  });

  it("selectTag refuses the disabled opposite", () => {
    const form = createEventForm(taxonomy, () => {});
    form.setDate("2021-01-09");
    form.selectTag("Guns");
    form.selectTag("For greater gun control");
    form.selectTag("Against greater gun control");
    expect(form.getEvent().tags).toEqual(["For greater gun control", "Guns"]);
  });

  it("unchecking re-enables the opposite", () => {
    const form = createEventForm(taxonomy, () => {});
    form.selectTag("For greater gun control");
    const forBox = checkbox(form.element, "For greater gun control");
    forBox.checked = false;
    forBox.dispatchEvent(new Event("change"));
    expect(checkbox(form.element, "Against greater gun control").disabled).toBe(false);
  });
});

describe("attendee preview", () => {
  it.each([
    ["a dozen", 10],
    ["dozens", 20],
    ["hundreds", 100],
    ["a couple hundred", 200],
    ["about 350 people", 350],
    ["200-300 people", 200],
  ])("previews %s as %d", (text, expected) => {
    const form = createEventForm(taxonomy, () => {});
    form.setAttendeeText(text);
    expect(form.element.querySelector(".attendee-preview")?.textContent).toBe(
      `≈ ${expected}`,
    );
  });

  it("clears the preview for unparseable text", () => {
    const form = createEventForm(taxonomy, () => {});
    form.setAttendeeText("a big crowd");
    expect(form.element.querySelector(".attendee-preview")?.textContent).toBe("");
  });
});

describe("event payload", () => {
  it("builds the full event from the form state", () => {
    const submitted: EventInput[] = [];
    const form = createEventForm(taxonomy, (event) => submitted.push(event));
    form.setDate("2021-01-09");
    form.setLocality("Springfield");
    form.setRegion("IL");
    form.setAttendeeText("about 350 people");
    form.setTense("future");
    form.selectTag("Guns");
    form.selectTag("For greater gun control");
    form.element.dispatchEvent(new Event("submit", { cancelable: true }));
    expect(submitted).toEqual([
      {
        date: "2021-01-09",
        locality: "Springfield",
        region: "IL",
        tags: ["For greater gun control", "Guns"],
        tense: "future",
        attendee_count: 350,
      },
    ]);
  });
});

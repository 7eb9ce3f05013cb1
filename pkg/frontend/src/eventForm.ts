import { parseAttendeePhrase } from "./attendees";
import type { EventInput, TaxonomyTag } from "./types";

// Single-event entry form. Submission stays disabled until the selected
// tags include at least one category and one position, and picking a
// position disables its declared opposite.

export interface EventForm {
  element: HTMLElement;
  isSubmittable(): boolean;
  getEvent(): EventInput;
  selectTag(name: string): void;
  setDate(value: string): void;
  setLocality(value: string): void;
  setRegion(value: string): void;
  setAttendeeText(value: string): void;
  setTense(value: "past" | "future"): void;
  showError(message: string): void;
  clearError(): void;
  readonly submitButton: HTMLButtonElement;
}

export function createEventForm(
  taxonomy: TaxonomyTag[],
  onSubmit: (event: EventInput) => void,
): EventForm {
  const byName = new Map(taxonomy.map((tag) => [tag.name, tag]));
  const selected = new Set<string>();

  const element = document.createElement("form");
  element.className = "event-form";

  const dateInput = field(element, "date", "Date", "date");
  const localityInput = field(element, "locality", "Locality", "text");
  const regionInput = field(element, "region", "Region", "text");
  const attendeeInput = field(element, "attendees", "Attendees", "text");

  const preview = document.createElement("span");
  preview.className = "attendee-preview";
  attendeeInput.insertAdjacentElement("afterend", preview);
  attendeeInput.addEventListener("input", () => updatePreview());

  const tenseSelect = document.createElement("select");
  tenseSelect.name = "tense";
  for (const value of ["past", "future"]) {
    const option = document.createElement("option");
    option.value = value;
    option.textContent = value;
    tenseSelect.appendChild(option);
  }
  element.appendChild(labelled("Tense", tenseSelect));

  const selector = document.createElement("fieldset");
  selector.className = "tag-selector";
  const checkboxes = new Map<string, HTMLInputElement>();
  for (const kind of ["category", "position", "detail"] as const) {
    const group = document.createElement("div");
    group.className = `tag-group tag-group-${kind}`;
    for (const tag of taxonomy.filter((t) => t.kind === kind)) {
      const checkbox = document.createElement("input");
      checkbox.type = "checkbox";
      checkbox.value = tag.name;
      checkbox.addEventListener("change", () => {
        if (checkbox.checked) {
          selected.add(tag.name);
        } else {
          selected.delete(tag.name);
        }
        enforceOpposites();
        updateSubmittable();
      });
      checkboxes.set(tag.name, checkbox);
      const label = document.createElement("label");
      label.append(checkbox, ` ${tag.name}`);
      group.appendChild(label);
    }
    selector.appendChild(group);
  }
  element.appendChild(selector);

  const errorPanel = document.createElement("div");
  errorPanel.className = "form-error";
  errorPanel.hidden = true;
  element.appendChild(errorPanel);

  const submitButton = document.createElement("button");
  submitButton.type = "submit";
  submitButton.textContent = "Save event";
  submitButton.disabled = true;
  element.appendChild(submitButton);

  function updatePreview(): void {
    const parsed = parseAttendeePhrase(attendeeInput.value);
    preview.textContent = parsed === null ? "" : `≈ ${parsed}`;
  }

  function enforceOpposites(): void {
    for (const name of selected) {
      const opposite = byName.get(name)?.opposite;
      if (!opposite) continue;
      const other = checkboxes.get(opposite);
      if (other) {
        other.disabled = true;
        other.checked = false;
        selected.delete(opposite);
      }
    }
    // Re-enable opposites whose partner is no longer selected.
    for (const [name, checkbox] of checkboxes) {
      const opposite = byName.get(name)?.opposite;
      if (opposite && !selected.has(opposite)) {
        checkbox.disabled = false;
      }
    }
  }

  function hasRequiredKinds(): boolean {
    let category = false;
    let position = false;
    for (const name of selected) {
      const kind = byName.get(name)?.kind;
      if (kind === "category") category = true;
      if (kind === "position") position = true;
    }
    return category && position;
  }

  function updateSubmittable(): void {
    submitButton.disabled = !(hasRequiredKinds() && dateInput.value !== "");
  }

  dateInput.addEventListener("input", updateSubmittable);

  function getEvent(): EventInput {
    const event: EventInput = {
      date: dateInput.value,
      locality: localityInput.value,
      region: regionInput.value,
      tags: [...selected].sort(),
      tense: tenseSelect.value as "past" | "future",
    };
    const attendees = parseAttendeePhrase(attendeeInput.value);
    if (attendees !== null) {
      event.attendee_count = attendees;
    }
    return event;
  }

  element.addEventListener("submit", (raised) => {
    raised.preventDefault();
    if (!submitButton.disabled) {
      onSubmit(getEvent());
    }
  });

  return {
    element,
    submitButton,
    isSubmittable: () => !submitButton.disabled,
    getEvent,
    selectTag(name: string) {
      const checkbox = checkboxes.get(name);
      if (!checkbox || checkbox.disabled) return;
      checkbox.checked = true;
      selected.add(name);
      enforceOpposites();
      updateSubmittable();
    },
    setDate(value: string) {
      dateInput.value = value;
      updateSubmittable();
    },
    setLocality(value: string) {
      localityInput.value = value;
    },
    setRegion(value: string) {
      regionInput.value = value;
    },
    setAttendeeText(value: string) {
      attendeeInput.value = value;
      updatePreview();
    },
    setTense(value: "past" | "future") {
      tenseSelect.value = value;
    },
    showError(message: string) {
      errorPanel.hidden = false;
      errorPanel.textContent = message;
    },
    clearError() {
      errorPanel.hidden = true;
      errorPanel.textContent = "";
    },
  };
}

function field(
  form: HTMLFormElement,
  name: string,
  label: string,
  type: string,
): HTMLInputElement {
  const input = document.createElement("input");
  input.type = type;
  input.name = name;
  form.appendChild(labelled(label, input));
  return input;
}

function labelled(text: string, control: HTMLElement): HTMLLabelElement {
  const label = document.createElement("label");
  label.append(`${text}: `, control);
  return label;
}

import { ApiClient, ApiError } from "./api";
import { renderDiff } from "./diff";
import { createEventForm, EventForm } from "./eventForm";
import type { ArticlePayload, ReviewDecision, TaxonomyTag } from "./types";

// One article's review screen: read the text (with diff highlights when
// a reviewed near-duplicate exists), accept or edit suggestions, submit
// exactly one decision. While a submission is in flight every control is
// disabled; a rejected decision re-enables them and surfaces the error.

export interface ReviewScreen {
  element: HTMLElement;
  form: EventForm;
  acceptSuggestionButton: HTMLButtonElement;
  skipButton: HTMLButtonElement;
  noEventsButton: HTMLButtonElement;
  submitDecision(decision: ReviewDecision): Promise<boolean>;
}

export function createReviewScreen(
  api: ApiClient,
  article: ArticlePayload,
  taxonomy: TaxonomyTag[],
  onDone: (articleId: string) => void,
): ReviewScreen {
  const element = document.createElement("article");
  element.className = "review-screen";
  element.dataset.articleId = article.id;

  const heading = document.createElement("h1");
  heading.textContent = article.title;
  element.appendChild(heading);

  const source = document.createElement("a");
  source.href = article.url;
  source.textContent = article.url;
  element.appendChild(source);

  const body = document.createElement("div");
  body.className = "article-body";
  if (article.diff) {
    body.appendChild(renderDiff(article.diff, article.paragraphs.join(" ")));
  } else {
    for (const paragraph of article.paragraphs) {
      const p = document.createElement("p");
      p.textContent = paragraph;
      body.appendChild(p);
    }
  }
  element.appendChild(body);

  const form = createEventForm(taxonomy, (event) => {
    void submitDecision({ decision: "events", events: [event] });
  });
  element.appendChild(form.element);

  const controls = document.createElement("div");
  controls.className = "review-controls";
  const acceptSuggestionButton = button(controls, "Accept suggestion", () => {
    for (const tag of article.suggestions.tags ?? []) {
      form.selectTag(tag.name);
    }
  });
  const noEventsButton = button(controls, "No events", () => {
    void submitDecision({ decision: "no_events" });
  });
  const skipButton = button(controls, "Skip", () => {
    void submitDecision({ decision: "skip" });
  });
  element.appendChild(controls);

  let inFlight = false;
  const allButtons = () => [
    acceptSuggestionButton,
    noEventsButton,
    skipButton,
    form.submitButton,
  ];

  async function submitDecision(decision: ReviewDecision): Promise<boolean> {
    if (inFlight) return false;
    inFlight = true;
    const submittableBefore = form.isSubmittable();
    form.clearError();
    for (const control of allButtons()) control.disabled = true;
    try {
      await api.submitReview(article.id, decision);
      element.classList.add("reviewed");
      onDone(article.id);
      return true;
    } catch (error) {
      // Roll back: the article stays editable, the error sits by the form.
      acceptSuggestionButton.disabled = false;
      noEventsButton.disabled = false;
      skipButton.disabled = false;
      form.submitButton.disabled = !submittableBefore;
      const message =
        error instanceof ApiError
          ? `${error.message} (HTTP ${error.status})`
          : "Network error; your entry is preserved.";
      form.showError(message);
      return false;
    } finally {
      inFlight = false;
    }
  }

  return { element, form, acceptSuggestionButton, skipButton, noEventsButton, submitDecision };
}

function button(parent: HTMLElement, label: string, onClick: () => void): HTMLButtonElement {
  const node = document.createElement("button");
  node.type = "button";
  node.textContent = label;
  node.addEventListener("click", onClick);
  parent.appendChild(node);
  return node;
}

import type { QueuePayload, Suggestions } from "./types";

// Renders the grouped review queue exactly as the API orders it; the
// client never reorders.

export function renderQueue(
  payload: QueuePayload,
  onOpen: (articleId: string) => void,
): HTMLElement {
  const container = document.createElement("div");
  container.className = "queue-view";
  if (payload.groups.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "Queue is empty; every article is reviewed.";
    container.appendChild(empty);
    return container;
  }
  for (const group of payload.groups) {
    const section = document.createElement("section");
    section.className = "queue-group";
    section.dataset.groupId = String(group.group_id);
    const heading = document.createElement("h2");
    heading.textContent = `Group ${group.group_id + 1} (${group.articles.length})`;
    section.appendChild(heading);
    const list = document.createElement("ol");
    for (const article of group.articles) {
      const item = document.createElement("li");
      item.className = "queue-article";
      item.dataset.articleId = article.article_id;
      const link = document.createElement("a");
      link.href = `#article/${article.article_id}`;
      link.textContent = article.title || article.url;
      link.addEventListener("click", (raised) => {
        raised.preventDefault();
        onOpen(article.article_id);
      });
      item.appendChild(link);
      item.appendChild(badges(article.suggestions, article.skip_eligible));
      list.appendChild(item);
    }
    section.appendChild(list);
    container.appendChild(section);
  }
  return container;
}

function badges(suggestions: Suggestions, skipEligible: boolean): HTMLElement {
  const span = document.createElement("span");
  span.className = "badges";
  if (typeof suggestions.domain_score === "number") {
    const badge = document.createElement("span");
    badge.className = "badge badge-domain";
    badge.textContent = suggestions.domain_score.toFixed(2);
    span.appendChild(badge);
  }
  if (suggestions.count_class) {
    const badge = document.createElement("span");
    badge.className = "badge badge-count";
    badge.textContent = suggestions.count_class;
    span.appendChild(badge);
  }
  for (const tag of suggestions.tags ?? []) {
    const badge = document.createElement("span");
    badge.className = "badge badge-tag";
    badge.textContent = tag.name;
    span.appendChild(badge);
  }
  if (skipEligible) {
    const badge = document.createElement("span");
    badge.className = "badge badge-skip";
    badge.textContent = "skip-eligible";
    span.appendChild(badge);
  }
  return span;
}

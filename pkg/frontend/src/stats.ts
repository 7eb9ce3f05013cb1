import type { StatsPayload } from "./types";

// Dashboard view: events-per-article histogram plus the category table,
// every number verbatim from the payload, rows in payload order.

export function renderStats(payload: StatsPayload): HTMLElement {
  const container = document.createElement("div");
  container.className = "stats-view";

  const histogram = document.createElement("div");
  histogram.className = "histogram";
  const entries = Object.entries(payload.events_per_article);
  if (entries.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "No reviewed articles yet.";
    histogram.appendChild(empty);
  } else {
    const max = Math.max(...entries.map(([, count]) => count));
    for (const [eventCount, articleCount] of entries) {
      const bar = document.createElement("div");
      bar.className = "histogram-bar";
      bar.dataset.events = eventCount;
      bar.dataset.articles = String(articleCount);
      bar.style.height = `${Math.round((100 * articleCount) / max)}px`;
      bar.title = `${eventCount} events: ${articleCount} articles`;
      const label = document.createElement("span");
      label.textContent = `${eventCount}: ${articleCount}`;
      bar.appendChild(label);
      histogram.appendChild(bar);
    }
  }
  container.appendChild(histogram);

  const table = document.createElement("table");
  table.className = "category-table";
  const head = table.createTHead().insertRow();
  for (const text of ["Category", "Events", "Articles"]) {
    const cell = document.createElement("th");
    cell.textContent = text;
    head.appendChild(cell);
  }
  const body = table.createTBody();
  for (const row of payload.category_table) {
    const tr = body.insertRow();
    tr.insertCell().textContent = row.category;
    tr.insertCell().textContent = String(row.events);
    tr.insertCell().textContent = String(row.articles);
  }
  container.appendChild(table);

  const tagSets = document.createElement("ol");
  tagSets.className = "top-tag-sets";
  for (const row of payload.top_tag_sets) {
    const item = document.createElement("li");
    item.textContent = `${row.tags.join("; ")} — ${row.events} events, ${row.articles} articles`;
    tagSets.appendChild(item);
  }
  container.appendChild(tagSets);
  return container;
}

export function renderRetryPanel(onRetry: () => void, message: string): HTMLElement {
  const panel = document.createElement("div");
  panel.className = "retry-panel";
  const text = document.createElement("p");
  text.textContent = message;
  const button = document.createElement("button");
  button.textContent = "Retry";
  button.addEventListener("click", onRetry);
  panel.append(text, button);
  return panel;
}

import { ApiClient } from "./api";
import { renderQueue } from "./queue";
import { createReviewScreen } from "./reviewFlow";
import { renderRetryPanel, renderStats } from "./stats";
import type { TaxonomyTag } from "./types";

// Single-page shell: #queue/<run>, #article/<id>, #stats. Keyboard-first:
// "n" opens the next unreviewed article, "s" skips, "a" accepts the
// suggested tags, because review nights run long.

export class App {
  private taxonomy: TaxonomyTag[] = [];
  private pending: string[] = [];
  private runId = "";
  private keyHandler = (raised: KeyboardEvent) => this.onKey(raised);

  constructor(
    private api: ApiClient,
    private root: HTMLElement,
  ) {}

  async start(runId: string): Promise<void> {
    this.runId = runId;
    this.taxonomy = (await this.api.getTaxonomy()).tags;
    await this.showQueue();
    document.addEventListener("keydown", this.keyHandler);
  }

  stop(): void {
    document.removeEventListener("keydown", this.keyHandler);
  }

  async showQueue(): Promise<void> {
    try {
      const payload = await this.api.getQueue(this.runId);
      this.pending = payload.groups.flatMap((g) => g.articles.map((a) => a.article_id));
      this.swap(renderQueue(payload, (id) => void this.openArticle(id)));
    } catch {
      this.swap(
        renderRetryPanel(() => void this.showQueue(), "Could not load the review queue."),
      );
    }
  }

  async openArticle(articleId: string): Promise<void> {
    const article = await this.api.getArticle(articleId);
    const screen = createReviewScreen(this.api, article, this.taxonomy, (done) => {
      this.pending = this.pending.filter((id) => id !== done);
      void this.next();
    });
    this.swap(screen.element);
  }

  async next(): Promise<void> {
    if (this.pending.length === 0) {
      await this.showQueue();
      return;
    }
    await this.openArticle(this.pending[0]);
  }

  async showStats(): Promise<void> {
    try {
      this.swap(renderStats(await this.api.getStats()));
    } catch {
      this.swap(renderRetryPanel(() => void this.showStats(), "Stats API unreachable."));
    }
  }

  private onKey(raised: KeyboardEvent): void {
    if (raised.target instanceof HTMLInputElement) return;
    const screen = this.root.querySelector<HTMLElement>(".review-screen");
    if (raised.key === "n") {
      void this.next();
    } else if (raised.key === "s" && screen) {
      screen.querySelectorAll("button").forEach((b) => {
        if (b.textContent === "Skip") b.click();
      });
    } else if (raised.key === "a" && screen) {
      screen.querySelectorAll("button").forEach((b) => {
        if (b.textContent === "Accept suggestion") b.click();
      });
    }
  }

  private swap(view: HTMLElement): void {
    this.root.replaceChildren(view);
  }
}

export function mount(base = "", runId = ""): App {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app mount point");
  const app = new App(new ApiClient(base), root);
  void app.start(runId || window.location.hash.replace(/^#queue\//, ""));
  return app;
}

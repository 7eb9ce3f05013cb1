// Payload shapes of the /v1 review API, mirrored field-for-field.

export interface DiffOp {
  op: "equal" | "insert" | "delete";
  tokens: string[];
}

export interface DiffPayload {
  ops: DiffOp[];
  change_ratio: number;
}

export interface SuggestedTag {
  name: string;
  score: number;
}

export interface Suggestions {
  domain_score?: number;
  count_class?: string;
  count_probs?: Record<string, number>;
  tags?: SuggestedTag[];
}

export interface QueueArticle {
  article_id: string;
  url: string;
  title: string;
  skip_eligible: boolean;
  suggestions: Suggestions;
  diff_against: string | null;
  diff?: DiffPayload;
}

export interface QueueGroup {
  group_id: number;
  articles: QueueArticle[];
}

export interface QueuePayload {
  run_id: string;
  groups: QueueGroup[];
}

export interface ParagraphHint {
  paragraph: number;
  reviewed_paragraph: number;
  score: number;
}

export interface ArticlePayload {
  id: string;
  url: string;
  title: string;
  paragraphs: string[];
  status: string;
  skip_eligible: boolean;
  suggestions: Suggestions;
  events: { event_id: string; tense: string }[];
  diff?: DiffPayload;
  diff_against?: string;
  paragraph_hints?: ParagraphHint[];
}

export interface TaxonomyTag {
  name: string;
  kind: "category" | "position" | "detail";
  opposite: string | null;
}

export interface TaxonomyPayload {
  tags: TaxonomyTag[];
}

export interface CategoryRow {
  category: string;
  events: number;
  articles: number;
}

export interface TagSetRow {
  tags: string[];
  events: number;
  articles: number;
}

export interface StatsPayload {
  events_per_article: Record<string, number>;
  category_table: CategoryRow[];
  top_tag_sets: TagSetRow[];
  total_events: number;
  total_articles: number;
  reviewed_articles: number;
}

export interface EventInput {
  date: string;
  locality: string;
  region: string;
  tags: string[];
  tense: "past" | "future";
  attendee_count?: number;
}

export type ReviewDecision =
  | { decision: "skip" }
  | { decision: "no_events" }
  | { decision: "events"; events: EventInput[] };

export interface ReviewResponse {
  id: string;
  status: string;
  events: { event_id: string; tense: string }[];
}

// Wire types for the refind service JSON API.

export interface PageSnapshot {
  page_id: string;
  url: string;
  title: string;
  fetched_at: string;
  text: string;
  description: string;
  html: string;
}

export type AnnotationKind = 'Highlight' | 'Note' | 'Drawing';

export interface Annotation {
  annotation_id: string;
  page_id: string;
  kind: AnnotationKind;
  span: [number, number] | null;
  region: string | null;
  quoted: string;
  body: string | null;
  category: string | null;
  created_at: string;
  stale: boolean;
}

export interface NuggetMatch {
  page_id: string;
  nugget_id: string;
  kind: string;
  normalized: string;
}

export interface SessionOpened {
  token: string;
  prompt: string;
  expires_at: string;
}

export interface UtteranceReply {
  prompt: string;
  results: NuggetMatch[] | null;
  state: string;
}

export interface TranscriptTurn {
  speaker: 'system' | 'user';
  utterance: string;
}

export interface Transcript {
  transcript: TranscriptTurn[];
  text: string;
}

export type GroupingMode = 'site' | 'category';

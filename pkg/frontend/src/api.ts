// Thin typed client for the refind service. All matching, ranking, and
// dialog behavior lives server-side; this module only moves JSON.

import type {
  Annotation,
  PageSnapshot,
  SessionOpened,
  Transcript,
  UtteranceReply,
} from './types.js';

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

export class Client {
  private pageCache = new Map<string, PageSnapshot>();

  constructor(readonly baseUrl: string) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      method,
      headers: body === undefined ? {} : { 'Content-Type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await response.json().catch(() => ({}));
    if (!response.ok) {
      const err = (payload as { error?: { code?: string; message?: string } }).error;
      throw new ApiError(response.status, err?.code ?? 'error', err?.message ?? response.statusText);
    }
    return payload as T;
  }

  async getPage(pageId: string): Promise<PageSnapshot> {
    const cached = this.pageCache.get(pageId);
    if (cached) return cached;
    const page = await this.request<PageSnapshot>('GET', `/pages/${pageId}`);
    this.pageCache.set(pageId, page);
    return page;
  }

  async listAnnotations(): Promise<Annotation[]> {
    const payload = await this.request<{ annotations: Annotation[] }>('GET', '/annotations');
    return payload.annotations;
  }

  async addHighlight(pageId: string, span: [number, number], category?: string): Promise<Annotation> {
    return this.request<Annotation>('POST', '/annotations', {
      page_id: pageId,
      kind: 'Highlight',
      span,
      category: category ?? null,
    });
  }

  async addDrawing(pageId: string, region: string, category?: string): Promise<Annotation> {
    return this.request<Annotation>('POST', '/annotations', {
      page_id: pageId,
      kind: 'Drawing',
      region,
      category: category ?? null,
    });
  }

  async openSession(): Promise<SessionOpened> {
    return this.request<SessionOpened>('POST', '/sessions');
  }

  async sendUtterance(token: string, utterance: string): Promise<UtteranceReply> {
    return this.request<UtteranceReply>('POST', `/sessions/${token}/utterances`, { utterance });
  }

  async getTranscript(token: string): Promise<Transcript> {
    return this.request<Transcript>('GET', `/sessions/${token}/transcript`);
  }
}

// Component rendering against a stubbed client (no network).

import { beforeEach, describe, expect, it } from 'vitest';

import type { Client } from '../src/api.js';
import { DialogPanel } from '../src/dialog.js';
import { renderWithHighlights, PageViewer, Sidebar } from '../src/sidebar.js';
import type { Annotation, PageSnapshot } from '../src/types.js';

const FINAL_PROMPT =
  'Now looking for matches. {pause}On the page titled, "Anytown Hotel Home Page," ' +
  'there is one result, {pause}five five five {pause} one two three four.';

function page(pageId: string, url: string, text: string): PageSnapshot {
  return {
    page_id: pageId,
    url,
    title: 'Anytown Hotel Home Page',
    fetched_at: '2026-01-05T12:00:00Z',
    text,
    description: text,
    html: `<html><body>${text}</body></html>`,
  };
}

function highlight(id: string, pageId: string, span: [number, number], category: string | null): Annotation {
  return {
    annotation_id: id,
    page_id: pageId,
    kind: 'Highlight',
    span,
    region: null,
    quoted: 'x',
    body: null,
    category,
    created_at: '2026-01-05T12:00:00Z',
    stale: false,
  };
}

function stubClient(overrides: Partial<Client>): Client {
  const stub = {
    openSession: async () => ({
      token: 't1',
      prompt: 'Welcome to the WebContext system. Please say some words to help identify the pages to search.',
      expires_at: '2026-01-05T12:30:00Z',
    }),
    sendUtterance: async () => ({ prompt: FINAL_PROMPT, results: null, state: 'Results' }),
    listAnnotations: async () => [] as Annotation[],
    getPage: async () => page('p1', 'http://anytown.example/hotel', 'call 555-1234 today'),
    getTranscript: async () => ({ transcript: [], text: '' }),
    ...overrides,
  };
  return stub as unknown as Client;
}

beforeEach(() => {
  document.body.innerHTML = '<div id="root"></div>';
});

function root(): HTMLElement {
  return document.getElementById('root') as HTMLElement;
}

describe('DialogPanel', () => {
  it('renders the welcome turn on open', async () => {
    const panel = new DialogPanel(root(), stubClient({}));
    await panel.open();
    const turns = root().querySelectorAll('.turn');
    expect(turns.length).toBe(1);
    expect(turns[0]!.textContent).toContain('Welcome to the WebContext system.');
  });

  it('renders pause markers as gaps, never as text', async () => {
    const panel = new DialogPanel(root(), stubClient({}));
    await panel.open();
    const input = root().querySelector('[data-role=input]') as HTMLInputElement;
    input.value = 'Yes.';
    await panel.sendUtterance();
    const log = root().querySelector('.chat-log') as HTMLElement;
    expect(log.textContent).not.toContain('{pause}');
    expect(log.textContent).toContain('there is one result');
    expect(log.querySelectorAll('.pause-gap').length).toBe(3);
  });

  it('disables send for empty input', () => {
    new DialogPanel(root(), stubClient({}));
    const send = root().querySelector('[data-role=send]') as HTMLButtonElement;
    expect(send.disabled).toBe(true);
    const input = root().querySelector('[data-role=input]') as HTMLInputElement;
    input.value = 'hello';
    input.dispatchEvent(new Event('input'));
    expect(send.disabled).toBe(false);
  });

  it('prompts to restart when the session has expired', async () => {
    const { ApiError } = await import('../src/api.js');
    const client = stubClient({
      sendUtterance: async () => {
        throw new ApiError(404, 'not-found', 'session expired');
      },
    } as Partial<Client>);
    const panel = new DialogPanel(root(), client);
    await panel.open();
    const input = root().querySelector('[data-role=input]') as HTMLInputElement;
    input.value = 'hello';
    await panel.sendUtterance();
    expect(root().textContent).toContain('Session ended. Restart to begin a new conversation.');
    expect(panel.sessionToken).toBeNull();
  });

  it('restart opens a fresh session with the welcome prompt', async () => {
    let sessions = 0;
    const client = stubClient({
      openSession: async () => {
        sessions += 1;
        return { token: `t${sessions}`, prompt: 'Welcome back.', expires_at: '' };
      },
    } as Partial<Client>);
    const panel = new DialogPanel(root(), client);
    await panel.open();
    await panel.open();
    expect(sessions).toBe(2);
    expect(root().querySelectorAll('.turn').length).toBe(1);
  });
});

describe('Sidebar', () => {
  const notes = [
    highlight('a1', 'p1', [5, 13], 'restaurants'),
    highlight('a2', 'p1', [0, 4], null),
  ];

  it('shows an empty state without annotations', async () => {
    const sidebar = new Sidebar(root(), stubClient({}), {
      show: async () => {},
    } as unknown as PageViewer);
    await sidebar.refresh();
    expect(root().textContent).toContain('No annotations yet.');
  });

  it('groups by site and by category with equal totals', async () => {
    const client = stubClient({
      listAnnotations: async () => notes,
    } as Partial<Client>);
    const sidebar = new Sidebar(root(), client, {
      show: async () => {},
    } as unknown as PageViewer);
    await sidebar.refresh();
    expect(sidebar.renderedCount).toBe(2);
    expect(root().textContent).toContain('anytown.example');
    await sidebar.setMode('category');
    expect(sidebar.renderedCount).toBe(2);
    expect(root().textContent).toContain('restaurants');
    expect(root().textContent).toContain('(uncategorized)');
  });
});

describe('renderWithHighlights', () => {
  it('wraps annotated spans in mark elements', () => {
    const target = document.createElement('div');
    const snapshot = page('p1', 'http://anytown.example/hotel', 'call 555-1234 today');
    renderWithHighlights(target, snapshot, [highlight('a1', 'p1', [5, 13], null)]);
    const marks = target.querySelectorAll('mark');
    expect(marks.length).toBe(1);
    expect(marks[0]!.textContent).toBe('555-1234');
    expect(target.textContent).toBe('call 555-1234 today');
  });

  it('renders plain text when no spans apply', () => {
    const target = document.createElement('div');
    const snapshot = page('p1', 'http://anytown.example/hotel', 'plain words');
    renderWithHighlights(target, snapshot, []);
    expect(target.querySelectorAll('mark').length).toBe(0);
    expect(target.textContent).toBe('plain words');
  });
});

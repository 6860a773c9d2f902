// Annotation sidebar: listings grouped by web site or by category, with a
// page viewer that marks highlight spans in the snapshot text.

import type { Client } from './api.js';
import { groupAnnotations, hostOf, UNCATEGORIZED } from './state.js';
import type { Annotation, GroupingMode, PageSnapshot } from './types.js';

export class Sidebar {
  private listing: HTMLElement;
  private toggle: HTMLElement;
  private mode: GroupingMode = 'site';
  private notes: Annotation[] = [];

  constructor(
    private root: HTMLElement,
    private client: Client,
    private viewer: PageViewer,
  ) {
    root.innerHTML = `
      <div class="sidebar-toggle" data-role="toggle">
        <button type="button" data-mode="site" class="active">By site</button>
        <button type="button" data-mode="category">By category</button>
      </div>
      <div class="sidebar-listing" data-role="listing"></div>`;
    this.listing = root.querySelector('[data-role=listing]') as HTMLElement;
    this.toggle = root.querySelector('[data-role=toggle]') as HTMLElement;
    this.toggle.addEventListener('click', (event) => {
      const button = (event.target as HTMLElement).closest('button');
      if (!button) return;
      void this.setMode(button.dataset.mode as GroupingMode);
    });
  }

  get groupingMode(): GroupingMode {
    return this.mode;
  }

  /** Number of annotation entries currently rendered (partition check). */
  get renderedCount(): number {
    return this.listing.querySelectorAll('.annotation-entry').length;
  }

  async setMode(mode: GroupingMode): Promise<void> {
    this.mode = mode;
    for (const button of this.toggle.querySelectorAll('button')) {
      button.classList.toggle('active', button.dataset.mode === mode);
    }
    await this.refresh();
  }

  async refresh(): Promise<void> {
    this.notes = await this.client.listAnnotations();
    const hosts = new Map<string, string>();
    if (this.mode === 'site') {
      for (const note of this.notes) {
        if (!hosts.has(note.page_id)) {
          const page = await this.client.getPage(note.page_id);
          hosts.set(note.page_id, hostOf(page.url));
        }
      }
    }
    const groups = groupAnnotations(this.notes, this.mode, (id) => hosts.get(id) ?? '');
    this.render(groups);
  }

  private render(groups: Map<string, Annotation[]>): void {
    this.listing.textContent = '';
    if (groups.size === 0) {
      const empty = document.createElement('p');
      empty.className = 'empty-state';
      empty.textContent = 'No annotations yet.';
      this.listing.appendChild(empty);
      return;
    }
    const keys = [...groups.keys()].sort((a, b) =>
      a === UNCATEGORIZED ? 1 : b === UNCATEGORIZED ? -1 : a.localeCompare(b),
    );
    for (const key of keys) {
      const section = document.createElement('section');
      section.className = 'annotation-group';
      const heading = document.createElement('h3');
      heading.textContent = key;
      section.appendChild(heading);
      for (const note of groups.get(key) ?? []) {
        section.appendChild(this.entryFor(note));
      }
      this.listing.appendChild(section);
    }
  }

  private entryFor(note: Annotation): HTMLElement {
    const entry = document.createElement('button');
    entry.type = 'button';
    entry.className = 'annotation-entry';
    entry.dataset.annotationId = note.annotation_id;
    const label = note.body ?? note.quoted ?? note.kind;
    entry.textContent = `${note.kind}: ${label}`;
    entry.addEventListener('click', () => {
      void this.viewer.show(note.page_id, this.notes);
    });
    return entry;
  }
}

export class PageViewer {
  constructor(
    private root: HTMLElement,
    private client: Client,
  ) {}

  /** Render a snapshot's text with highlight spans visually marked. */
  async show(pageId: string, notes: Annotation[]): Promise<void> {
    const page = await this.client.getPage(pageId);
    this.root.textContent = '';
    const heading = document.createElement('h2');
    heading.textContent = page.title || page.url;
    this.root.appendChild(heading);
    const body = document.createElement('div');
    body.className = 'page-text';
    renderWithHighlights(body, page, notes);
    this.root.appendChild(body);
  }
}

export function renderWithHighlights(
  target: HTMLElement,
  page: PageSnapshot,
  notes: Annotation[],
): void {
  const spans = notes
    .filter((n) => n.page_id === page.page_id && n.span !== null)
    .map((n) => n.span as [number, number])
    .filter(([a, b]) => a < b)
    .sort((x, y) => x[0] - y[0]);
  let cursor = 0;
  for (const [start, end] of spans) {
    if (start < cursor) continue; // overlapping spans render once
    target.appendChild(document.createTextNode(page.text.slice(cursor, start)));
    const mark = document.createElement('mark');
    mark.textContent = page.text.slice(start, end);
    target.appendChild(mark);
    cursor = end;
  }
  target.appendChild(document.createTextNode(page.text.slice(cursor)));
}

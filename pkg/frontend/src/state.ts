// Client-side view state and the grouping partition over annotations.
// Grouping is a presentation concern: toggling the mode must never drop or
// duplicate an annotation.

import type { Annotation, GroupingMode } from './types.js';

export const UNCATEGORIZED = '(uncategorized)';

export interface ViewState {
  grouping: GroupingMode;
  selectedPageId: string | null;
  sessionToken: string | null;
}

export function initialViewState(): ViewState {
  return { grouping: 'site', selectedPageId: null, sessionToken: null };
}

export function hostOf(url: string): string {
  try {
    return new URL(url).hostname.toLowerCase();
  } catch {
    return '';
  }
}

/** Partition annotations by site host or by category name, preserving order. */
export function groupAnnotations(
  notes: Annotation[],
  mode: GroupingMode,
  hostForPage: (pageId: string) => string,
): Map<string, Annotation[]> {
  const groups = new Map<string, Annotation[]>();
  for (const note of notes) {
    const key =
      mode === 'site' ? hostForPage(note.page_id) : note.category ?? UNCATEGORIZED;
    const bucket = groups.get(key);
    if (bucket) {
      bucket.push(note);
    } else {
      groups.set(key, [note]);
    }
  }
  return groups;
}

export function groupedCount(groups: Map<string, Annotation[]>): number {
  let total = 0;
  for (const bucket of groups.values()) total += bucket.length;
  return total;
}

/** Rendered text for one transcript utterance: {pause} markers become
 * visual gaps, so they never show up as literal text. */
export function utteranceFragments(utterance: string): string[] {
  return utterance.split('{pause}');
}

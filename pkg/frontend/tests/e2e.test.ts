// End-to-end: boot the UI in jsdom against a live refind service over a
// sample archive, reproduce the golden re-finding conversation, and check
// the sidebar groupings.

import { spawn, type ChildProcess } from 'node:child_process';
import { mkdtempSync, rmSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { Client } from '../src/api.js';
import { boot } from '../src/main.js';

const ANYTOWN_URL = 'http://anytown.example/hotel';
const ANYTOWN_HTML = `<html><head><title>Anytown Hotel Home Page</title></head>
<body><h1>Anytown Hotel</h1>
<p>Welcome to the Anytown Hotel. For reservations call 555-1234.</p>
<p>123 Main Street, Anytown 24060. Rooms from $89.00. Check-in 3:00 pm.</p>
</body></html>`;

let proc: ChildProcess | null = null;
let base = '';
let workdir = '';

async function startService(): Promise<void> {
  workdir = mkdtempSync(join(tmpdir(), 'refind-ui-'));
  proc = spawn(
    'python3',
    ['-m', 'refind.cli', 'serve', join(workdir, 'archive'), '--bind', '127.0.0.1:0'],
    { stdio: ['ignore', 'pipe', 'pipe'], env: { ...process.env, PYTHONUNBUFFERED: '1' } },
  );
  base = await new Promise<string>((resolve, reject) => {
    let buffer = '';
    const timer = setTimeout(
      () => reject(new Error(`service did not start:\n${buffer}`)),
      20000,
    );
    proc!.stdout!.on('data', (chunk: Buffer) => {
      buffer += String(chunk);
      const match = buffer.match(/on (http:\/\/[\d.]+:\d+)/);
      if (match) {
        clearTimeout(timer);
        resolve(match[1]!);
      }
    });
    proc!.stderr!.on('data', (chunk: Buffer) => {
      buffer += String(chunk);
    });
    proc!.on('exit', (code) => {
      clearTimeout(timer);
      reject(new Error(`service exited with ${code}:\n${buffer}`));
    });
  });
}

async function seedFixture(): Promise<void> {
  const ingest = await fetch(`${base}/pages`, {
    method: 'POST',
    headers: { 'Content-Type': 'application/json' },
    body: JSON.stringify({
      url: ANYTOWN_URL,
      html: ANYTOWN_HTML,
      fetched_at: '2026-01-05T12:00:00Z',
    }),
  });
  expect(ingest.status).toBe(201);
  const snapshot = (await ingest.json()) as { page_id: string; text: string };
  const start = snapshot.text.indexOf('555-1234');

  const annotations = [
    { kind: 'Highlight', span: [start, start + 8], category: 'restaurants' },
    { kind: 'Drawing', region: 'circled', category: 'movies' },
    { kind: 'Drawing', region: 'box', category: 'travel' },
  ];
  for (const extra of annotations) {
    const created = await fetch(`${base}/annotations`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ page_id: snapshot.page_id, ...extra }),
    });
    expect(created.status).toBe(201);
  }
}

beforeAll(async () => {
  window.__REFIND_NO_AUTOBOOT__ = true;
  await startService();
  await seedFixture();
});

afterAll(async () => {
  if (proc) {
    proc.kill('SIGTERM');
    await new Promise((resolve) => proc!.on('exit', resolve));
  }
  if (workdir) rmSync(workdir, { recursive: true, force: true });
});

describe('dialog panel against the live service', () => {
  it('reproduces the golden conversation in rendered text', async () => {
    document.body.innerHTML = '<div id="app"></div>';
    const app = document.getElementById('app') as HTMLElement;
    const { dialog } = boot(app, base, false);
    await dialog.open();

    const input = app.querySelector('[data-role=input]') as HTMLInputElement;
    for (const utterance of ['Anytown hotel', 'The phone number.', 'Yes.']) {
      input.value = utterance;
      await dialog.sendUtterance();
    }

    const log = app.querySelector('.chat-log') as HTMLElement;
    const text = log.textContent ?? '';
    expect(text).toContain(
      'Welcome to the WebContext system. Please say some words to help identify the pages to search.',
    );
    expect(text).toContain('What piece of information are you looking for?');
    expect(text).toContain(
      'Looking for phone numbers on web pages with Anytown hotel. Is this correct?',
    );
    expect(text).toContain(
      'On the page titled, "Anytown Hotel Home Page," there is one result,',
    );
    expect(text).toContain('five five five');
    expect(text).toContain('one two three four');
    expect(text).not.toContain('{pause}');

    const turns = log.querySelectorAll('.turn');
    expect(turns.length).toBe(7); // welcome + 3 user/system pairs
  });

  it('server transcript matches the rendered conversation order', async () => {
    document.body.innerHTML = '<div id="app"></div>';
    const app = document.getElementById('app') as HTMLElement;
    const { dialog } = boot(app, base, false);
    await dialog.open();
    const input = app.querySelector('[data-role=input]') as HTMLInputElement;
    input.value = 'Anytown hotel';
    await dialog.sendUtterance();

    const client = new Client(base);
    const transcript = await client.getTranscript(dialog.sessionToken!);
    const rendered = [...app.querySelectorAll('.turn')].map((t) => t.textContent);
    expect(transcript.transcript.map((t) => t.utterance)).toEqual(rendered);
  });
});

describe('sidebar against the live service', () => {
  it('shows builtin category groups and preserves counts across toggles', async () => {
    document.body.innerHTML = '<div id="app"></div>';
    const app = document.getElementById('app') as HTMLElement;
    const { sidebar } = boot(app, base, false);

    await sidebar.setMode('category');
    const headings = [...app.querySelectorAll('.annotation-group h3')].map(
      (h) => h.textContent,
    );
    expect(headings).toEqual(['movies', 'restaurants', 'travel']);
    const byCategory = sidebar.renderedCount;

    await sidebar.setMode('site');
    const siteHeadings = [...app.querySelectorAll('.annotation-group h3')].map(
      (h) => h.textContent,
    );
    expect(siteHeadings).toEqual(['anytown.example']);
    expect(sidebar.renderedCount).toBe(byCategory);
    expect(byCategory).toBe(3);
  });

  it('opens a page with highlight spans marked', async () => {
    document.body.innerHTML = '<div id="app"></div>';
    const app = document.getElementById('app') as HTMLElement;
    const { sidebar } = boot(app, base, false);
    await sidebar.refresh();

    const entry = app.querySelector('.annotation-entry') as HTMLButtonElement;
    expect(entry).toBeTruthy();
    entry.click();
    await new Promise((resolve) => setTimeout(resolve, 200)); // viewer fetch

    const marks = app.querySelectorAll('main mark');
    expect(marks.length).toBe(1);
    expect(marks[0]!.textContent).toBe('555-1234');
  });
});

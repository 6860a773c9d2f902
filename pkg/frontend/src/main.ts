// Application entry: wires the sidebar, page viewer, and dialog panel to a
// refind service. The service base URL comes from the ?service= query
// parameter, defaulting to the page's own origin.

import { Client } from './api.js';
import { DialogPanel } from './dialog.js';
import { PageViewer, Sidebar } from './sidebar.js';

function serviceBase(): string {
  const fromQuery = new URLSearchParams(window.location.search).get('service');
  return (fromQuery ?? window.location.origin).replace(/\/$/, '');
}

export function boot(
  root: HTMLElement,
  baseUrl: string = serviceBase(),
  autostart = true,
): {
  sidebar: Sidebar;
  dialog: DialogPanel;
  viewer: PageViewer;
  ready: Promise<void>;
} {
  root.innerHTML = `
    <div class="layout">
      <aside data-role="sidebar"></aside>
      <main data-role="viewer"><p class="empty-state">Pick an annotation to open its page.</p></main>
      <section data-role="dialog" class="dialog-panel"></section>
    </div>
    <div data-role="error" class="error-banner" hidden></div>`;

  const client = new Client(baseUrl);
  const viewer = new PageViewer(root.querySelector('[data-role=viewer]') as HTMLElement, client);
  const sidebar = new Sidebar(root.querySelector('[data-role=sidebar]') as HTMLElement, client, viewer);
  const dialog = new DialogPanel(root.querySelector('[data-role=dialog]') as HTMLElement, client);

  const banner = root.querySelector('[data-role=error]') as HTMLElement;
  const showError = (message: string) => {
    banner.hidden = false;
    banner.textContent = `${message} `;
    const retry = document.createElement('button');
    retry.type = 'button';
    retry.textContent = 'Retry';
    retry.addEventListener('click', () => {
      banner.hidden = true;
      void start();
    });
    banner.appendChild(retry);
  };

  const start = async () => {
    try {
      await sidebar.refresh();
      await dialog.open();
    } catch (err) {
      showError(err instanceof Error ? err.message : 'Service unreachable.');
    }
  };
  const ready = autostart ? start() : Promise.resolve();

  return { sidebar, dialog, viewer, ready };
}

declare global {
  interface Window {
    __REFIND_NO_AUTOBOOT__?: boolean;
  }
}

if (typeof document !== 'undefined' && !window.__REFIND_NO_AUTOBOOT__) {
  const root = document.getElementById('app');
  if (root) boot(root);
}

// Dialog chat panel: drives a live re-finding session over the service API
// and renders the transcript as chat bubbles.

import type { Client } from './api.js';
import { ApiError } from './api.js';
import { utteranceFragments } from './state.js';
import type { TranscriptTurn } from './types.js';

export class DialogPanel {
  private token: string | null = null;
  private log: HTMLElement;
  private input: HTMLInputElement;
  private send: HTMLButtonElement;
  private restart: HTMLButtonElement;

  constructor(
    private root: HTMLElement,
    private client: Client,
  ) {
    root.innerHTML = `
      <div class="chat-log" data-role="log"></div>
      <form class="chat-form" data-role="form">
        <input type="text" data-role="input" placeholder="Say something..." autocomplete="off">
        <button type="submit" data-role="send" disabled>Send</button>
        <button type="button" data-role="restart">Restart</button>
      </form>`;
    this.log = root.querySelector('[data-role=log]') as HTMLElement;
    this.input = root.querySelector('[data-role=input]') as HTMLInputElement;
    this.send = root.querySelector('[data-role=send]') as HTMLButtonElement;
    this.restart = root.querySelector('[data-role=restart]') as HTMLButtonElement;

    this.input.addEventListener('input', () => {
      this.send.disabled = this.input.value.trim() === '';
    });
    (root.querySelector('[data-role=form]') as HTMLFormElement).addEventListener(
      'submit',
      (event) => {
        event.preventDefault();
        void this.sendUtterance();
      },
    );
    this.restart.addEventListener('click', () => void this.open());
  }

  /** Open a fresh session and render its welcome prompt. */
  async open(): Promise<void> {
    this.log.textContent = '';
    const opened = await this.client.openSession();
    this.token = opened.token;
    this.appendTurn({ speaker: 'system', utterance: opened.prompt });
  }

  async sendUtterance(): Promise<void> {
    const text = this.input.value.trim();
    if (!text || !this.token) return;
    this.input.value = '';
    this.send.disabled = true;
    this.appendTurn({ speaker: 'user', utterance: text });
    try {
      const reply = await this.client.sendUtterance(this.token, text);
      this.appendTurn({ speaker: 'system', utterance: reply.prompt });
    } catch (err) {
      if (err instanceof ApiError && (err.status === 404 || err.status === 409)) {
        this.appendNotice('Session ended. Restart to begin a new conversation.');
        this.token = null;
      } else {
        throw err;
      }
    }
  }

  /** Re-render from the server transcript (state lives server-side). */
  async refreshFromServer(): Promise<void> {
    if (!this.token) return;
    const transcript = await this.client.getTranscript(this.token);
    this.log.textContent = '';
    for (const turn of transcript.transcript) this.appendTurn(turn);
  }

  get sessionToken(): string | null {
    return this.token;
  }

  private appendTurn(turn: TranscriptTurn): void {
    const bubble = document.createElement('div');
    bubble.className = `turn ${turn.speaker}`;
    const fragments = utteranceFragments(turn.utterance);
    fragments.forEach((fragment, i) => {
      if (i > 0) {
        const gap = document.createElement('span');
        gap.className = 'pause-gap';
        gap.setAttribute('aria-hidden', 'true');
        bubble.appendChild(gap);
      }
      bubble.appendChild(document.createTextNode(fragment));
    });
    this.log.appendChild(bubble);
    this.log.scrollTop = this.log.scrollHeight;
  }

  private appendNotice(message: string): void {
    const notice = document.createElement('div');
    notice.className = 'turn notice';
    notice.textContent = message;
    this.log.appendChild(notice);
  }
}

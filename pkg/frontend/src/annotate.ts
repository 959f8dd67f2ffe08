// Annotator flow: fetch the next queued pair, render both panels blind
// (no weights, no clusters, no other judgments), submit a 0-4 relatedness
// choice, move on.  Keyboard keys 0-4 mirror the buttons.

import { ApiClient, ContextPanel, QueueItem } from './api.js';

export const SCALE_LABELS: Record<number, string> = {
  4: 'Identical',
  3: 'Closely Related',
  2: 'Distantly Related',
  1: 'Unrelated',
  0: 'Cannot decide',
};

function renderPanel(panel: ContextPanel): HTMLElement {
  const div = document.createElement('div');
  div.className = 'panel';
  if (panel.kind === 'sense') {
    const gloss = document.createElement('p');
    gloss.className = 'gloss';
    gloss.textContent = panel.gloss ?? '';
    div.appendChild(gloss);
    return div;
  }
  const p = document.createElement('p');
  p.className = 'context';
  (panel.tokens ?? []).forEach((tok, i) => {
    if (i > 0) p.appendChild(document.createTextNode(' '));
    if (i === panel.target_index) {
      const mark = document.createElement('mark');
      mark.textContent = tok;
      p.appendChild(mark);
    } else {
      p.appendChild(document.createTextNode(tok));
    }
  });
  div.appendChild(p);
  return div;
}

export class AnnotateView {
  private item: QueueItem | null = null;
  private submitting = false;
  private pending: Promise<void> = Promise.resolve();
  private keyHandler: (e: KeyboardEvent) => void;

  constructor(private root: HTMLElement, private api: ApiClient,
              private campaign: string, private annotator: string) {
    this.keyHandler = (e) => {
      if (/^[0-4]$/.test(e.key)) this.pending = this.submit(Number(e.key));
    };
    root.ownerDocument.addEventListener('keydown', this.keyHandler);
  }

  // resolves once any in-flight submit/refresh kicked off by a click or
  // keypress has settled
  whenIdle(): Promise<void> {
    return this.pending;
  }

  dispose(): void {
    this.root.ownerDocument.removeEventListener('keydown', this.keyHandler);
  }

  get currentItem(): QueueItem | null {
    return this.item;
  }

  async refresh(): Promise<void> {
    try {
      this.item = await this.api.nextItem(this.campaign, this.annotator);
    } catch (err) {
      this.renderError(String(err));
      return;
    }
    this.render();
  }

  async submit(value: number): Promise<void> {
    if (!this.item || this.submitting) return;
    this.submitting = true;
    const pair = this.item.pair;
    try {
      await this.api.submitJudgment(this.campaign, pair, value);
    } catch (err) {
      // keep the same item on failure so a retry re-submits the same pair
      this.submitting = false;
      this.renderError(`submit failed, try again: ${String(err)}`);
      return;
    }
    this.submitting = false;
    await this.refresh();
  }

  private render(): void {
    this.root.textContent = '';
    if (!this.item) {
      const done = document.createElement('p');
      done.className = 'queue-empty';
      done.textContent = 'No more pairs this round.';
      this.root.appendChild(done);
      return;
    }
    const progress = document.createElement('p');
    progress.className = 'progress';
    progress.textContent = `${this.item.judged} / ${this.item.assigned} judged this round`;
    this.root.appendChild(progress);

    const panels = document.createElement('div');
    panels.className = 'panels';
    panels.appendChild(renderPanel(this.item.left));
    panels.appendChild(renderPanel(this.item.right));
    this.root.appendChild(panels);

    const buttons = document.createElement('div');
    buttons.className = 'buttons';
    for (const value of [4, 3, 2, 1, 0]) {
      const btn = document.createElement('button');
      btn.dataset.value = String(value);
      btn.textContent = `${value} ${SCALE_LABELS[value]}`;
      btn.addEventListener('click', () => {
        this.pending = this.submit(value);
      });
      buttons.appendChild(btn);
    }
    this.root.appendChild(buttons);
  }

  private renderError(message: string): void {
    let err = this.root.querySelector('.error');
    if (!err) {
      err = document.createElement('p');
      err.className = 'error';
      this.root.prepend(err);
    }
    err.textContent = message;
  }
}

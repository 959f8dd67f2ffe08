// Operator dashboard: per-word round progress, an advance button, and the
// final binary/graded scores once a word is done.  Service errors (such as
// advancing an incomplete round) are shown verbatim.

import { ApiClient, ScoresView, WordStatus } from './api.js';

export class OperatorDashboard {
  private pending: Promise<void> = Promise.resolve();

  constructor(private root: HTMLElement, private api: ApiClient,
              private campaign: string) {}

  whenIdle(): Promise<void> {
    return this.pending;
  }

  async refresh(): Promise<void> {
    let words: WordStatus[];
    try {
      words = (await this.api.campaignStatus(this.campaign)).words;
    } catch (err) {
      this.renderError(String(err));
      return;
    }
    const scores = new Map<string, ScoresView>();
    for (const w of words) {
      if (w.status === 'done') {
        scores.set(w.word, await this.api.scores(this.campaign, w.word));
      }
    }
    this.render(words, scores);
  }

  private render(words: WordStatus[], scores: Map<string, ScoresView>): void {
    this.root.textContent = '';
    const table = document.createElement('table');
    table.className = 'words';
    const head = document.createElement('tr');
    for (const col of ['word', 'round', 'status', 'progress', 'scores', '']) {
      const th = document.createElement('th');
      th.textContent = col;
      head.appendChild(th);
    }
    table.appendChild(head);

    for (const w of words) {
      const tr = document.createElement('tr');
      tr.dataset.word = w.word;

      const cells = [
        w.word,
        String(w.round),
        w.status,
        `${w.judged}/${w.assigned}`,
      ];
      for (const text of cells) {
        const td = document.createElement('td');
        td.textContent = text;
        tr.appendChild(td);
      }

      const scoreTd = document.createElement('td');
      scoreTd.className = 'scores';
      const s = scores.get(w.word);
      if (s && s.binary !== null && s.binary !== undefined) {
        scoreTd.textContent = `B=${s.binary} G=${s.graded?.toFixed(3)}`;
      } else {
        scoreTd.textContent = '-';
      }
      tr.appendChild(scoreTd);

      const actionTd = document.createElement('td');
      const btn = document.createElement('button');
      btn.className = 'advance';
      btn.textContent = 'advance round';
      btn.disabled = w.status === 'done' || w.judged < w.assigned;
      btn.addEventListener('click', () => {
        this.pending = this.advance(w.word);
      });
      actionTd.appendChild(btn);
      tr.appendChild(actionTd);

      table.appendChild(tr);
    }
    this.root.appendChild(table);
  }

  async advance(word: string): Promise<void> {
    try {
      await this.api.advance(this.campaign, word);
    } catch (err) {
      this.renderError(String(err));
      return;
    }
    await this.refresh();
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

// Entry point: a small login form picks the role; annotators get the
// judgment flow, operators the round dashboard.  The only configuration is
// the service base URL (defaults to the serving origin).

import { ApiClient } from './api.js';
import { AnnotateView } from './annotate.js';
import { OperatorDashboard } from './dashboard.js';

function value(id: string): string {
  return (document.getElementById(id) as HTMLInputElement).value.trim();
}

function start(): void {
  const form = document.getElementById('login') as HTMLFormElement;
  const root = document.getElementById('app') as HTMLElement;
  form.addEventListener('submit', (e) => {
    e.preventDefault();
    const baseUrl = value('base-url') || window.location.origin;
    const api = new ApiClient(baseUrl, value('token'));
    const campaign = value('campaign');
    const annotator = value('annotator');
    form.hidden = true;
    if (annotator) {
      const view = new AnnotateView(root, api, campaign, annotator);
      void view.refresh();
    } else {
      const dash = new OperatorDashboard(root, api, campaign);
      void dash.refresh();
    }
  });
}

document.addEventListener('DOMContentLoaded', start);

/**
 * Panel entry point.
 *
 * Wires model, client, and renderer together and runs the single
 * rendering loop. The service address comes from the `?server=` URL
 * query (host:port), defaulting to the page's own host and finally to
 * the local development address.
 */

import { BenchClient } from './client.js';
import { UiModel, viewState } from './model.js';
import { Panel } from './panel.js';

function serverAddress(): string {
  const query = new URLSearchParams(window.location.search).get('server');
  if (query) return query;
  if (window.location.host) return window.location.host;
  return '127.0.0.1:8000';
}

function start(): void {
  const root = document.getElementById('app');
  if (!root) throw new Error('missing #app container');

  const model = new UiModel();
  const client = new BenchClient(
    `ws://${serverAddress()}/ws`,
    model,
    (url) => new WebSocket(url),
  );

  const panel = new Panel(root, {
    onPower: (on) => client.send(on ? 'power_on' : 'power_off'),
    onStart: () => client.send('start_motor'),
    onStop: () => client.send('stop_motor'),
    onHousing: (open) => client.send(open ? 'open_housing' : 'close_housing'),
    onReset: () => client.send('reset_fault'),
    onFaultToggle: (fault, enable) => client.setFault(fault, enable),
    onPotentiometer: (fraction) => client.setPotentiometer(fraction),
  });

  let renderedVersion = -1;
  let renderedToast: string | null = null;
  const frame = () => {
    const view = viewState(model, Date.now());
    // re-render on model changes and on toast expiry
    if (model.version !== renderedVersion || view.toast !== renderedToast) {
      panel.apply(view);
      renderedVersion = model.version;
      renderedToast = view.toast;
    }
    window.requestAnimationFrame(frame);
  };
  window.requestAnimationFrame(frame);

  client.connect();
}

start();

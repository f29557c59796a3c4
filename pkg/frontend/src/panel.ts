/**
 * Workbench operator panel - DOM renderer.
 *
 * Builds the panel once, then apply(view) mutates the cached elements.
 * All indicator state comes from the PanelView projection; this file
 * holds no simulation logic and never invents state.
 *
 * Layout mirrors the physical bench front:
 * - switch column: power, start/stop, housing, reset, potentiometer
 * - indicator block: green/yellow LEDs, 16x2 LCD, buzzer
 * - live meters: per-phase voltage and current (bar + numeric), motor
 * - fault selector grid (eight toggles)
 * - trip-event log
 */

import { PanelView } from './model.js';
import { FaultKind } from './protocol.js';

export interface PanelCallbacks {
  onPower: (on: boolean) => void;
  onStart: () => void;
  onStop: () => void;
  onHousing: (open: boolean) => void;
  onReset: () => void;
  onFaultToggle: (fault: FaultKind, enable: boolean) => void;
  onPotentiometer: (fraction: number) => void;
}

const FAULT_LABELS: Record<FaultKind, string> = {
  overvoltage: 'Overvoltage',
  undervoltage: 'Undervoltage',
  overcurrent: 'Overcurrent',
  phase_loss: 'Phase Loss',
  locked_rotor: 'Locked Rotor',
  extended_start: 'Extended Start',
  voltage_unbalance: 'Voltage Unbal.',
  current_unbalance: 'Current Unbal.',
};

const PHASE_NAMES = ['A', 'B', 'C'];

interface MeterRefs {
  bar: HTMLElement;
  num: HTMLElement;
}

export class Panel {
  private readonly root: HTMLElement;
  private readonly callbacks: PanelCallbacks;

  private banner!: HTMLElement;
  private connDot!: HTMLElement;
  private serverLine!: HTMLElement;
  private tickLabel!: HTMLElement;

  private powerBtn!: HTMLButtonElement;
  private startBtn!: HTMLButtonElement;
  private stopBtn!: HTMLButtonElement;
  private housingBtn!: HTMLButtonElement;
  private resetBtn!: HTMLButtonElement;
  private potSlider!: HTMLInputElement;
  private potValue!: HTMLElement;

  private greenLed!: HTMLElement;
  private yellowLed!: HTMLElement;
  private lcdTop!: HTMLElement;
  private lcdBottom!: HTMLElement;
  private buzzer!: HTMLElement;
  private audioToggle!: HTMLInputElement;

  private voltMeters: MeterRefs[] = [];
  private ampMeters: MeterRefs[] = [];
  private freqLabel!: HTMLElement;
  private motorPhaseLabel!: HTMLElement;
  private motorSpeedLabel!: HTMLElement;

  private selectorBtns = new Map<FaultKind, HTMLButtonElement>();
  private tripBody!: HTMLElement;
  private toast!: HTMLElement;

  private lastView: PanelView | null = null;
  private audio: { ctx: AudioContext; osc: OscillatorNode } | null = null;

  constructor(root: HTMLElement, callbacks: PanelCallbacks) {
    this.root = root;
    this.callbacks = callbacks;
    this.build();
  }

  // -- construction ----------------------------------------------------------

  private build(): void {
    this.root.innerHTML = '';
    this.root.className = 'panel';

    this.banner = el('div', 'banner');
    this.root.appendChild(this.banner);

    const header = el('div', 'header');
    const title = el('div', 'title');
    title.textContent = 'MOTOR WORKBENCH';
    this.connDot = el('span', 'conn-dot');
    this.serverLine = el('span', 'server-line');
    this.tickLabel = el('span', 'tick-label');
    header.append(title, this.connDot, this.serverLine, this.tickLabel);
    this.root.appendChild(header);

    const main = el('div', 'main');
    main.append(
      this.buildControls(),
      this.buildIndicators(),
      this.buildMeters(),
    );
    this.root.appendChild(main);

    this.root.appendChild(this.buildSelectors());
    this.root.appendChild(this.buildTripLog());

    this.toast = el('div', 'toast');
    this.root.appendChild(this.toast);
  }

  private buildControls(): HTMLElement {
    const card = el('div', 'card controls');
    card.appendChild(cardTitle('Controls'));

    this.powerBtn = button('POWER', () => {
      const on = this.lastView?.powerOn ?? false;
      this.callbacks.onPower(!on);
    });
    this.powerBtn.classList.add('power');
    this.startBtn = button('START', () => this.callbacks.onStart());
    this.stopBtn = button('STOP', () => this.callbacks.onStop());
    this.housingBtn = button('HOUSING', () => {
      const open = this.lastView?.housingOpen ?? false;
      this.callbacks.onHousing(!open);
    });
    this.resetBtn = button('RESET', () => this.callbacks.onReset());
    this.resetBtn.classList.add('reset');
    card.append(
      this.powerBtn,
      this.startBtn,
      this.stopBtn,
      this.housingBtn,
      this.resetBtn,
    );

    const potRow = el('div', 'pot-row');
    const potLabel = el('label', 'pot-label');
    potLabel.textContent = 'Potentiometer';
    this.potSlider = document.createElement('input');
    this.potSlider.type = 'range';
    this.potSlider.min = '0';
    this.potSlider.max = '1';
    this.potSlider.step = '0.01';
    this.potSlider.addEventListener('change', () => {
      this.callbacks.onPotentiometer(Number(this.potSlider.value));
    });
    this.potValue = el('span', 'pot-value');
    potRow.append(potLabel, this.potSlider, this.potValue);
    card.appendChild(potRow);
    return card;
  }

  private buildIndicators(): HTMLElement {
    const card = el('div', 'card indicators');
    card.appendChild(cardTitle('Indicators'));

    const leds = el('div', 'led-row');
    this.greenLed = ledWidget(leds, 'green', 'RUN');
    this.yellowLed = ledWidget(leds, 'yellow', 'FAULT');
    card.appendChild(leds);

    const lcd = el('div', 'lcd');
    this.lcdTop = el('div', 'lcd-line');
    this.lcdBottom = el('div', 'lcd-line');
    lcd.append(this.lcdTop, this.lcdBottom);
    card.appendChild(lcd);

    const buzzerRow = el('div', 'buzzer-row');
    this.buzzer = el('span', 'buzzer');
    this.buzzer.textContent = 'BUZZER';
    const audioLabel = el('label', 'audio-label');
    this.audioToggle = document.createElement('input');
    this.audioToggle.type = 'checkbox';
    audioLabel.append(this.audioToggle, document.createTextNode(' audio'));
    buzzerRow.append(this.buzzer, audioLabel);
    card.appendChild(buzzerRow);
    return card;
  }

  private buildMeters(): HTMLElement {
    const card = el('div', 'card meters');
    card.appendChild(cardTitle('Live Meters'));

    const grid = el('div', 'meter-grid');
    for (let phase = 0; phase < 3; phase++) {
      grid.appendChild(this.meterRow(`V${PHASE_NAMES[phase]}`, this.voltMeters));
    }
    for (let phase = 0; phase < 3; phase++) {
      grid.appendChild(this.meterRow(`I${PHASE_NAMES[phase]}`, this.ampMeters));
    }
    card.appendChild(grid);

    const motorRow = el('div', 'motor-row');
    this.freqLabel = el('span', 'motor-stat');
    this.motorPhaseLabel = el('span', 'motor-stat');
    this.motorSpeedLabel = el('span', 'motor-stat');
    motorRow.append(this.freqLabel, this.motorPhaseLabel, this.motorSpeedLabel);
    card.appendChild(motorRow);
    return card;
  }

  private meterRow(label: string, bucket: MeterRefs[]): HTMLElement {
    const row = el('div', 'meter-row');
    const name = el('span', 'meter-name');
    name.textContent = label;
    const track = el('div', 'meter-track');
    const bar = el('div', 'meter-bar');
    track.appendChild(bar);
    const num = el('span', 'meter-num');
    row.append(name, track, num);
    bucket.push({ bar, num });
    return row;
  }

  private buildSelectors(): HTMLElement {
    const card = el('div', 'card selectors');
    card.appendChild(cardTitle('Fault Selectors'));
    const grid = el('div', 'selector-grid');
    for (const fault of Object.keys(FAULT_LABELS) as FaultKind[]) {
      const btn = button(FAULT_LABELS[fault], () => {
        const view = this.lastView;
        const active = view?.selectors.find((s) => s.fault === fault)?.active;
        this.callbacks.onFaultToggle(fault, !active);
      });
      btn.classList.add('selector');
      this.selectorBtns.set(fault, btn);
      grid.appendChild(btn);
    }
    card.appendChild(grid);
    return card;
  }

  private buildTripLog(): HTMLElement {
    const card = el('div', 'card trip-log');
    card.appendChild(cardTitle('Trip Log'));
    const table = document.createElement('table');
    const head = document.createElement('tr');
    for (const col of ['t (s)', 'ANSI', 'fault', 'measured', 'setting']) {
      const th = document.createElement('th');
      th.textContent = col;
      head.appendChild(th);
    }
    table.appendChild(head);
    this.tripBody = document.createElement('tbody');
    table.appendChild(this.tripBody);
    card.appendChild(table);
    return card;
  }

  // -- rendering --------------------------------------------------------------

  apply(view: PanelView): void {
    this.banner.textContent = view.banner ?? '';
    this.banner.classList.toggle('visible', view.banner !== null);
    this.connDot.className = `conn-dot ${view.connection}`;
    this.serverLine.textContent = view.serverLine;
    this.tickLabel.textContent = `tick ${view.tick}`;

    const enabled = view.controlsEnabled;
    for (const btn of [
      this.powerBtn,
      this.startBtn,
      this.stopBtn,
      this.housingBtn,
      this.resetBtn,
    ]) {
      btn.disabled = !enabled;
    }
    this.potSlider.disabled = !enabled;

    this.powerBtn.classList.toggle('on', view.powerOn);
    this.powerBtn.textContent = view.powerOn ? 'POWER ON' : 'POWER OFF';
    this.housingBtn.textContent = view.housingOpen
      ? 'HOUSING OPEN'
      : 'HOUSING CLOSED';
    depress(this.powerBtn, view.pendingKinds.has('power_on') || view.pendingKinds.has('power_off'));
    depress(this.startBtn, view.pendingKinds.has('start_motor'));
    depress(this.stopBtn, view.pendingKinds.has('stop_motor'));
    depress(this.resetBtn, view.pendingKinds.has('reset_fault'));

    // slider follows the snapshot unless the operator is mid-drag
    if (document.activeElement !== this.potSlider) {
      this.potSlider.value = String(view.potentiometer);
    }
    this.potValue.textContent = view.potentiometer.toFixed(2);

    this.greenLed.classList.toggle('lit', view.greenLed);
    this.yellowLed.classList.toggle('lit', view.yellowLed);
    this.lcdTop.textContent = view.lcdLines[0];
    this.lcdBottom.textContent = view.lcdLines[1];
    this.buzzer.classList.toggle('sounding', view.buzzerOn);
    this.updateAudio(view.buzzerOn);

    for (let phase = 0; phase < 3; phase++) {
      applyMeter(this.voltMeters[phase], view.volts[phase], 'V');
      applyMeter(this.ampMeters[phase], view.amps[phase], 'A');
    }
    this.freqLabel.textContent = `${view.frequencyHz.toFixed(1)} Hz`;
    this.motorPhaseLabel.textContent = `motor: ${view.motorPhase}`;
    this.motorSpeedLabel.textContent = `${view.speedRadS.toFixed(1)} rad/s`;

    for (const sel of view.selectors) {
      const btn = this.selectorBtns.get(sel.fault);
      if (!btn) continue;
      btn.disabled = !enabled;
      btn.classList.toggle('active', sel.active);
      depress(btn, sel.pending);
    }

    this.renderTripRows(view);

    this.toast.textContent = view.toast ?? '';
    this.toast.classList.toggle('visible', view.toast !== null);

    this.lastView = view;
  }

  private renderTripRows(view: PanelView): void {
    if (
      this.lastView !== null &&
      sameTripRows(this.lastView, view)
    ) {
      return;
    }
    this.tripBody.innerHTML = '';
    for (const row of view.tripRows) {
      const tr = document.createElement('tr');
      for (const cell of [
        row.timeS.toFixed(2),
        row.ansiFunction,
        row.faultKind,
        row.measured,
        row.setting,
      ]) {
        const td = document.createElement('td');
        td.textContent = cell;
        tr.appendChild(td);
      }
      this.tripBody.appendChild(tr);
    }
  }

  /** Buzzer audio is opt-in; browsers block autoplay without a gesture. */
  private updateAudio(buzzerOn: boolean): void {
    const want = buzzerOn && this.audioToggle.checked;
    if (want && this.audio === null && typeof AudioContext !== 'undefined') {
      const ctx = new AudioContext();
      const osc = ctx.createOscillator();
      osc.type = 'square';
      osc.frequency.value = 2000;
      const gain = ctx.createGain();
      gain.gain.value = 0.05;
      osc.connect(gain).connect(ctx.destination);
      osc.start();
      this.audio = { ctx, osc };
    } else if (!want && this.audio !== null) {
      this.audio.osc.stop();
      void this.audio.ctx.close();
      this.audio = null;
    }
  }
}

// -- small DOM helpers --------------------------------------------------------

function el(tag: string, className: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  return node;
}

function cardTitle(text: string): HTMLElement {
  const node = el('div', 'card-title');
  node.textContent = text;
  return node;
}

function button(label: string, onClick: () => void): HTMLButtonElement {
  const btn = document.createElement('button');
  btn.textContent = label;
  btn.addEventListener('click', onClick);
  return btn;
}

function ledWidget(parent: HTMLElement, color: string, label: string): HTMLElement {
  const wrap = el('div', 'led-wrap');
  const led = el('div', `led ${color}`);
  const text = el('span', 'led-label');
  text.textContent = label;
  wrap.append(led, text);
  parent.appendChild(wrap);
  return led;
}

function depress(btn: HTMLButtonElement, pending: boolean): void {
  btn.classList.toggle('pending', pending);
}

function applyMeter(refs: MeterRefs, view: { value: number; fraction: number }, unit: string): void {
  refs.bar.style.width = `${(view.fraction * 100).toFixed(1)}%`;
  refs.bar.classList.toggle('hot', view.fraction > 0.85);
  refs.num.textContent = `${view.value.toFixed(1)} ${unit}`;
}

function sameTripRows(a: PanelView, b: PanelView): boolean {
  if (a.tripRows.length !== b.tripRows.length) return false;
  for (let i = 0; i < a.tripRows.length; i++) {
    if (a.tripRows[i].timeS !== b.tripRows[i].timeS) return false;
    if (a.tripRows[i].ansiFunction !== b.tripRows[i].ansiFunction) return false;
  }
  return true;
}

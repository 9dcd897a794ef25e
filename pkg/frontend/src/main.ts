/**
 * Application controller: owns the state, orchestrates API calls, and
 * re-renders the two views.  At most one select/match query chain is in
 * flight; issuing a new one aborts and supersedes the previous chain.
 */

import { ApiClient } from "./api.js";
import type { TokenRecord } from "./api.js";
import { buildMatchModel, renderMatchView } from "./matchView.js";
import { buildSelectModel, renderSelectView } from "./selectView.js";
import {
  applyError,
  applyMatch,
  applySelect,
  clearPhrase,
  contextSpan,
  initialState,
  jumpTo,
  navigate,
  selectPhrase,
  setContext,
  setMode,
  setTau,
  type ViewState,
} from "./state.js";

export class App {
  state: ViewState = initialState();
  private tokens: TokenRecord[] = [];
  private controller: AbortController | null = null;

  constructor(
    private readonly client: ApiClient,
    private readonly selectRoot: HTMLElement,
    private readonly matchRoot: HTMLElement,
  ) {}

  async start(): Promise<void> {
    const meta = await this.client.meta();
    this.state = initialState(meta.token_count, meta.l);
    await this.loadWindow();
    this.render();
  }

  private async loadWindow(): Promise<void> {
    if (this.state.tokenCount === 0) {
      this.tokens = [];
      return;
    }
    const count = Math.min(this.state.windowSize, this.state.tokenCount - this.state.offset);
    const window = await this.client.tokens(this.state.offset, count);
    this.tokens = window.tokens;
  }

  private update(next: ViewState, requery: boolean): void {
    this.state = next;
    if (requery) void this.runQuery();
    this.render();
  }

  /** Issue select + match for the current parameters, dropping stale replies. */
  private async runQuery(): Promise<void> {
    if (!this.state.phrase) return;
    this.controller?.abort();
    const controller = new AbortController();
    this.controller = controller;
    const generation = this.state.generation;
    const context = contextSpan(this.state) ?? undefined;
    try {
      const selection = await this.client.select(
        {
          phrase: this.state.phrase,
          context,
          tau: this.state.tau,
          mode: this.state.mode,
        },
        controller.signal,
      );
      this.state = applySelect(this.state, generation, selection);
      this.render();
      if (generation !== this.state.generation || selection.query_dims.length === 0) {
        return;
      }
      const matches = await this.client.match(
        { query_dims: selection.query_dims, tau: this.state.tau },
        controller.signal,
      );
      this.state = applyMatch(this.state, generation, matches);
      this.render();
    } catch (err) {
      if (err instanceof DOMException && err.name === "AbortError") return;
      const message = err instanceof Error ? err.message : String(err);
      this.state = applyError(this.state, generation, message);
      this.render();
    }
  }

  render(): void {
    const selectModel = buildSelectModel(this.state, this.tokens, this.state.selection);
    renderSelectView(this.selectRoot, selectModel, this.state, {
      onTokenClick: (position, extend) => {
        if (extend && this.state.phrase) {
          this.update(selectPhrase(this.state, this.state.phrase[0], position), true);
        } else if (this.state.phrase && this.state.phrase[0] === position
                   && this.state.phrase[1] === position) {
          this.update(clearPhrase(this.state), false);
        } else {
          this.update(selectPhrase(this.state, position, position), true);
        }
      },
      onNavigate: (delta) => {
        this.state = navigate(this.state, delta);
        void this.loadWindow().then(() => this.render());
      },
      onTauChange: (tau) => this.update(setTau(this.state, tau), true),
      onContextChange: (left, right) => this.update(setContext(this.state, left, right), true),
      onModeChange: (mode) => this.update(setMode(this.state, mode), true),
    });
    renderMatchView(this.matchRoot, buildMatchModel(this.state.matches), {
      onMatchClick: (start) => {
        this.state = jumpTo(this.state, start);
        void this.loadWindow().then(() => this.render());
      },
    });
  }
}

export function bootstrap(): void {
  const selectRoot = document.getElementById("select-view");
  const matchRoot = document.getElementById("match-view");
  if (!selectRoot || !matchRoot) {
    throw new Error("missing #select-view or #match-view containers");
  }
  const app = new App(new ApiClient(""), selectRoot, matchRoot);
  void app.start().catch((err) => {
    selectRoot.textContent = `failed to load trace: ${err}`;
  });
}

if (typeof document !== "undefined" && document.getElementById("select-view")) {
  bootstrap();
}

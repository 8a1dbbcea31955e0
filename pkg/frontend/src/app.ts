// DOM wiring: image grid with click voting, prompt hover with token trace,
// charts column, ballot submission, finalize + sample gallery.

import { Api, ApiError } from "./api";
import type { IndividualDoc, SessionConfigBody, StatsDoc } from "./api";
import { barSvg, colorFor, radarSvg, streamSvg } from "./charts";
import {
  ViewState,
  addVote,
  applyVoteResponse,
  ballotOf,
  beginEvolve,
  failEvolve,
  finalize,
  initialViewState,
  loadGeneration,
  totalVotes,
  withStats,
} from "./state";

const SESSION_KEY = "evoart-session";

export interface AppOptions {
  sessionConfig?: SessionConfigBody;
  /** Asked before submitting an all-zero ballot; defaults to window.confirm. */
  confirmZeroBallot?: () => boolean;
  storage?: Pick<Storage, "getItem" | "setItem" | "removeItem">;
}

export class App {
  state: ViewState = initialViewState();
  /** Last in-flight handler action; tests await this. */
  pending: Promise<void> | null = null;

  private readonly confirmZero: () => boolean;
  private readonly storage: Pick<Storage, "getItem" | "setItem" | "removeItem">;
  // one nonce per (tab, generation): resubmitting after a network failure
  // retries the same evolve instead of running a second one
  private readonly instanceId = Math.random().toString(36).slice(2, 10);

  constructor(
    readonly root: HTMLElement,
    readonly api: Api,
    readonly options: AppOptions = {},
  ) {
    this.confirmZero =
      options.confirmZeroBallot ??
      (() => window.confirm("No votes cast. Evolve a fresh random generation?"));
    this.storage = options.storage ?? window.localStorage;
    this.root.innerHTML = `
      <header>
        <h1>evoart</h1>
        <span id="generation-label"></span>
        <span id="votes-label"></span>
        <button id="next-gen">Next generation</button>
        <button id="satisfied">I'm satisfied</button>
      </header>
      <div id="banner" hidden></div>
      <main>
        <section id="grid" aria-label="generation grid"></section>
        <aside id="charts"></aside>
      </main>
      <section id="result" hidden>
        <h2>Optimized prompting model</h2>
        <a id="download-model" download="model.yaml">Download model.yaml</a>
        <div id="sample-gallery"></div>
      </section>
      <div id="prompt-overlay" hidden></div>
    `;
    this.el("#next-gen").addEventListener("click", () => {
      this.pending = this.submit();
    });
    this.el("#satisfied").addEventListener("click", () => {
      this.pending = this.finalizeSession();
    });
  }

  el<T extends HTMLElement = HTMLElement>(selector: string): T {
    const found = this.root.querySelector<T>(selector);
    if (!found) throw new Error(`missing element ${selector}`);
    return found;
  }

  /** Create a session, or resume the one remembered in storage. */
  async start(): Promise<void> {
    const remembered = this.storage.getItem(SESSION_KEY);
    if (remembered) {
      try {
        const generation = await this.api.population(remembered);
        this.state = loadGeneration(this.state, generation);
        await this.refreshStats();
        this.render();
        return;
      } catch (err) {
        if (!(err instanceof ApiError && err.status === 404)) throw err;
        this.storage.removeItem(SESSION_KEY);
      }
    }
    const created = await this.api.createSession(this.options.sessionConfig ?? {});
    this.storage.setItem(SESSION_KEY, created.session);
    this.state = loadGeneration(this.state, created.generation);
    await this.refreshStats();
    this.render();
  }

  async refreshStats(): Promise<void> {
    if (!this.state.session) return;
    const stats = await this.api.stats(this.state.session);
    this.state = withStats(this.state, stats);
  }

  vote(id: string, delta: 1 | -1): void {
    this.state = addVote(this.state, id, delta);
    this.renderBadges();
  }

  async submit(): Promise<void> {
    const session = this.state.session;
    if (this.state.phase !== "viewing" || !session) return;
    const ballot = ballotOf(this.state);
    if (totalVotes(this.state) === 0 && !this.confirmZero()) return;
    const expected = this.state.index + 1;
    this.state = beginEvolve(this.state);
    this.render();
    try {
      const nonce = `ui-${this.instanceId}-${this.state.index}`;
      const resp = await this.api.submitVotes(session, ballot, nonce);
      this.state = applyVoteResponse(this.state, resp);
      if (this.state.index !== expected) {
        this.state = failEvolve(this.state, "generation already advanced - refresh");
      }
      await this.refreshStats();
    } catch (err) {
      const message =
        err instanceof ApiError && (err.status === 409 || err.status === 404)
          ? "generation already advanced - refresh"
          : `ballot failed: ${(err as Error).message}`;
      this.state = failEvolve(this.state, message);
    }
    this.render();
  }

  async finalizeSession(): Promise<void> {
    if (this.state.phase !== "viewing" || !this.state.session) return;
    try {
      const doc = await this.api.finalize(this.state.session);
      const samples = await this.api.sample(this.state.session, 4);
      this.state = finalize(this.state);
      this.render();
      const link = this.el<HTMLAnchorElement>("#download-model");
      link.href = `data:application/x-yaml;charset=utf-8,${encodeURIComponent(doc.yaml)}`;
      const gallery = this.el("#sample-gallery");
      gallery.innerHTML = "";
      for (const sample of samples.samples) {
        const figure = document.createElement("figure");
        const img = document.createElement("img");
        img.src = sample.image_url ?? "";
        img.alt = sample.prompt;
        const caption = document.createElement("figcaption");
        caption.textContent = sample.prompt;
        figure.append(img, caption);
        gallery.append(figure);
      }
      this.el("#result").hidden = false;
    } catch (err) {
      this.state = failEvolve(
        this.state,
        err instanceof ApiError && err.code === "no_iterations"
          ? "vote at least once before finalizing"
          : `finalize failed: ${(err as Error).message}`,
      );
      this.render();
    }
  }

  // -- rendering -----------------------------------------------------------

  render(): void {
    this.el("#generation-label").textContent =
      this.state.index >= 0 ? `generation ${this.state.index}` : "";
    const banner = this.el("#banner");
    banner.hidden = !this.state.banner;
    banner.textContent = this.state.banner ?? "";

    const grid = this.el("#grid");
    grid.classList.toggle("disabled", this.state.phase !== "viewing");
    (this.el<HTMLButtonElement>("#next-gen")).disabled = this.state.phase !== "viewing";
    (this.el<HTMLButtonElement>("#satisfied")).disabled = this.state.phase !== "viewing";

    grid.innerHTML = "";
    for (const individual of this.state.individuals) {
      grid.append(this.card(individual));
    }
    this.renderBadges();
    this.renderCharts();
  }

  private card(individual: IndividualDoc): HTMLElement {
    const card = document.createElement("figure");
    card.className = "card";
    card.dataset.id = individual.id;
    const img = document.createElement("img");
    img.src = individual.image_url ?? "";
    img.alt = individual.prompt;
    img.draggable = false;
    const badge = document.createElement("span");
    badge.className = "votes-badge";
    badge.hidden = true;
    card.append(img, badge);

    card.addEventListener("click", () => this.vote(individual.id, 1));
    card.addEventListener("contextmenu", (event) => {
      event.preventDefault();
      this.vote(individual.id, -1);
    });
    card.addEventListener("mouseenter", () => this.showPrompt(card, individual));
    card.addEventListener("mouseleave", () => this.hidePrompt());
    return card;
  }

  private renderBadges(): void {
    for (const card of this.root.querySelectorAll<HTMLElement>(".card")) {
      const id = card.dataset.id ?? "";
      const count = this.state.tallies[id] ?? 0;
      const badge = card.querySelector<HTMLElement>(".votes-badge");
      if (badge) {
        badge.hidden = count === 0;
        badge.textContent = String(count);
      }
      card.classList.toggle("voted", count > 0);
    }
    this.el("#votes-label").textContent = `${totalVotes(this.state)} votes pending`;
  }

  private showPrompt(card: HTMLElement, individual: IndividualDoc): void {
    const overlay = this.el("#prompt-overlay");
    overlay.innerHTML = "";
    const genes: string[] = [];
    for (const [gene] of individual.token_trace) {
      if (!genes.includes(gene)) genes.push(gene);
    }
    const colorOf = (gene: string) => colorFor(gene, genes.indexOf(gene));

    // the exact service-provided prompt text, with each emitted token
    // wrapped in a span colored by the gene that produced it
    const line = document.createElement("div");
    line.className = "prompt-line";
    let rest = individual.prompt;
    for (const [gene, token] of individual.token_trace) {
      const at = rest.indexOf(token);
      if (at > 0) line.append(rest.slice(0, at));
      const span = document.createElement("span");
      span.className = "trace-token";
      span.dataset.gene = gene;
      span.style.color = colorOf(gene);
      span.textContent = token;
      line.append(span);
      rest = rest.slice(Math.max(at, 0) + token.length);
    }
    if (rest) line.append(rest);

    const legend = document.createElement("div");
    legend.className = "prompt-legend";
    for (const gene of genes) {
      const item = document.createElement("span");
      item.className = "legend-gene";
      item.dataset.gene = gene;
      item.style.color = colorOf(gene);
      item.textContent = gene;
      legend.append(item);
    }
    overlay.append(line, legend);
    overlay.hidden = false;
  }

  private hidePrompt(): void {
    this.el("#prompt-overlay").hidden = true;
  }

  private renderCharts(): void {
    const charts = this.el("#charts");
    const stats: StatsDoc | null = this.state.stats;
    if (!stats || stats.iterations.length === 0) {
      charts.innerHTML = "";
      return;
    }
    const latest = stats.iterations[stats.iterations.length - 1]!;
    const parts: string[] = [];
    for (const [attr, values] of Object.entries(latest.radar)) {
      parts.push(radarSvg(attr, values));
    }
    for (const [attr, bar] of Object.entries(latest.bars)) {
      parts.push(barSvg(attr, bar, ["0", "1"]));
    }
    // one stream per discrete attribute, grouping its value tokens
    for (const [attr, values] of Object.entries(latest.radar)) {
      const series: Record<string, number[]> = {};
      for (const token of Object.keys(values)) {
        const xs = stats.stream[token];
        if (xs) series[token] = xs;
      }
      parts.push(streamSvg(attr, series));
    }
    charts.innerHTML = parts.join("");
  }
}

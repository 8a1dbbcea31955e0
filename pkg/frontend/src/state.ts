// View state machine. The server owns all GA state; this tracks only what
// the user sees and the ballot being assembled. Phase transitions are
// viewing -> evolving -> viewing, or viewing -> finalized.

import type { GenerationDoc, IndividualDoc, StatsDoc, VoteResponseDoc } from "./api";

export type Phase = "viewing" | "evolving" | "finalized";

export interface ViewState {
  session: string | null;
  index: number;
  phase: Phase;
  individuals: IndividualDoc[];
  tallies: Record<string, number>;
  stats: StatsDoc | null;
  banner: string | null;
}

export function initialViewState(): ViewState {
  return {
    session: null,
    index: -1,
    phase: "viewing",
    individuals: [],
    tallies: {},
    stats: null,
    banner: null,
  };
}

export function loadGeneration(state: ViewState, generation: GenerationDoc): ViewState {
  return {
    ...state,
    session: generation.session,
    index: generation.index,
    phase: "viewing",
    individuals: generation.individuals,
    tallies: {},
    banner: null,
  };
}

export function withStats(state: ViewState, stats: StatsDoc): ViewState {
  return { ...state, stats };
}

/** Click = +1, right-click = -1 with a floor at zero. Ignored outside viewing. */
export function addVote(state: ViewState, id: string, delta: 1 | -1): ViewState {
  if (state.phase !== "viewing") return state;
  if (!state.individuals.some((i) => i.id === id)) return state;
  const next = Math.max(0, (state.tallies[id] ?? 0) + delta);
  return { ...state, tallies: { ...state.tallies, [id]: next } };
}

export function ballotOf(state: ViewState): Record<string, number> {
  const ballot: Record<string, number> = {};
  for (const [id, count] of Object.entries(state.tallies)) {
    if (count > 0) ballot[id] = count;
  }
  return ballot;
}

export function totalVotes(state: ViewState): number {
  return Object.values(ballotOf(state)).reduce((a, b) => a + b, 0);
}

export function beginEvolve(state: ViewState): ViewState {
  if (state.phase !== "viewing") {
    throw new Error(`cannot submit a ballot while ${state.phase}`);
  }
  return { ...state, phase: "evolving", banner: null };
}

export function applyVoteResponse(state: ViewState, resp: VoteResponseDoc): ViewState {
  if (state.phase !== "evolving") {
    throw new Error("no ballot in flight");
  }
  return loadGeneration(state, resp.generation);
}

export function failEvolve(state: ViewState, message: string): ViewState {
  return { ...state, phase: "viewing", banner: message };
}

export function finalize(state: ViewState): ViewState {
  if (state.phase !== "viewing") {
    throw new Error(`cannot finalize while ${state.phase}`);
  }
  return { ...state, phase: "finalized", banner: null };
}

/**
 * Session state machine: List -> Detail -> (feedback) -> List' ->
 * Assessment -> next trial.
 *
 * The server acknowledgment gates every transition: an action first POSTs
 * its event, then re-renders from the response (or a fresh GET). On API
 * failure a retry banner appears and local state is left untouched, so a
 * reload always reconstructs the identical view from server state.
 */

import * as api from "./api.js";
import { DetailPayload, ListPayload, QuizPayload } from "./schemas.js";
import {
  renderAssessment,
  renderBanner,
  renderDetail,
  renderList,
  clearBanner,
} from "./views.js";

export type Screen = "list" | "detail" | "assessment";

export interface SessionState {
  sid: string;
  screen: Screen;
  list: ListPayload | null;
  detail: DetailPayload | null;
  quiz: QuizPayload | null;
  verdicts: Map<number, "like" | "dislike">;
}

let state: SessionState | null = null;
let root: HTMLElement;

export function currentState(): SessionState | null {
  return state;
}

export function mount(element: HTMLElement): void {
  root = element;
}

function render(): void {
  if (!state) return;
  clearBanner(root);
  if (state.screen === "list" && state.list) {
    renderList(root, state.list, state.verdicts, actions);
  } else if (state.screen === "detail" && state.detail) {
    renderDetail(root, state.detail, actions);
  } else if (state.screen === "assessment" && state.quiz && state.list) {
    renderAssessment(root, state.quiz, state.list, actions);
  }
}

function failWithRetry(err: unknown, retry: () => Promise<void>): void {
  const message = err instanceof api.ApiError ? err.message : String(err);
  renderBanner(root, message, () => {
    void retry();
  });
}

async function guarded(action: () => Promise<void>): Promise<void> {
  try {
    await action();
  } catch (err) {
    failWithRetry(err, () => guarded(action));
  }
}

export const actions = {
  async start(sid: string): Promise<void> {
    await guarded(async () => {
      const list = await api.getRecommendations(sid);
      state = {
        sid,
        screen: "list",
        list,
        detail: null,
        quiz: null,
        verdicts: new Map(),
      };
      render();
    });
  },

  async openDetail(itemId: number): Promise<void> {
    if (!state) return;
    await guarded(async () => {
      const detail = await api.getExplanation(state!.sid, itemId);
      state!.detail = detail;
      state!.screen = "detail";
      render();
    });
  },

  async backToList(): Promise<void> {
    if (!state) return;
    await guarded(async () => {
      state!.list = await api.getRecommendations(state!.sid);
      state!.detail = null;
      state!.screen = "list";
      render();
    });
  },

  /** One slider commit; the server returns the re-ranked list. */
  async submitFeedback(
    feature: { kind: string; name: string },
    omegaBefore: number,
    omegaAfter: number,
  ): Promise<void> {
    if (!state || !state.detail) return;
    const detail = state.detail;
    await guarded(async () => {
      const list = await api.postFeedback(state!.sid, {
        trial: detail.trial,
        item_id: detail.item_id,
        feature: feature as { kind: "genre" | "tag" | "actor" | "director"; name: string },
        omega_before: omegaBefore,
        omega_after: omegaAfter,
      });
      state!.list = list;
      // refresh the open detail so displayed weights stay server truth
      try {
        state!.detail = await api.getExplanation(state!.sid, detail.item_id);
      } catch {
        state!.detail = null;
        state!.screen = "list";
      }
      render();
    });
  },

  async markSatisfaction(
    itemId: number,
    verdict: "like" | "dislike",
  ): Promise<void> {
    if (!state || !state.list) return;
    await guarded(async () => {
      await api.postSatisfaction(state!.sid, {
        trial: state!.list!.trial,
        item_id: itemId,
        verdict,
      });
      state!.verdicts.set(itemId, verdict);
      render();
    });
  },

  async openAssessment(): Promise<void> {
    if (!state) return;
    await guarded(async () => {
      state!.quiz = await api.getQuiz(state!.sid);
      state!.screen = "assessment";
      render();
    });
  },

  /** Quiz + self-assessment are one form; both must post before advancing. */
  async submitAssessment(
    answers: { judgment: "correct" | "incorrect"; confidence: number }[],
    scales: {
      valence: number;
      dominance: number;
      mental_demand: number;
      performance: number;
      effort: number;
      frustration: number;
      efficacy_self_rating: number;
    },
  ): Promise<void> {
    if (!state || !state.quiz) return;
    const trial = state.quiz.trial;
    await guarded(async () => {
      await api.postQuiz(state!.sid, { trial, answers });
      await api.postAssessment(state!.sid, { trial, ...scales });
      const list = await api.nextRecommendations(state!.sid);
      state!.list = list;
      state!.quiz = null;
      state!.verdicts = new Map();
      state!.screen = "list";
      render();
    });
  },
};

export type Actions = typeof actions;

/**
 * DOM rendering. Every number shown is taken verbatim from an API payload.
 *
 * The 1-9 manikin/confidence inputs are continuous click strips: the click
 * position below the printed numbers maps linearly onto [1, 9].
 */

import { DetailPayload, ListPayload, QuizPayload } from "./schemas.js";
import type { Actions } from "./controller.js";

function el(html: string): HTMLElement {
  const template = document.createElement("template");
  template.innerHTML = html.trim();
  return template.content.firstElementChild as HTMLElement;
}

export function clearBanner(root: HTMLElement): void {
  root.querySelector(".banner")?.remove();
}

export function renderBanner(
  root: HTMLElement,
  message: string,
  onRetry: () => void,
): void {
  clearBanner(root);
  const banner = el(`
    <div class="banner" role="alert">
      <span class="banner-text">Request failed: ${message}</span>
      <button class="banner-retry">Retry</button>
    </div>`);
  banner.querySelector(".banner-retry")!.addEventListener("click", onRetry);
  root.prepend(banner);
}

export function renderList(
  root: HTMLElement,
  list: ListPayload,
  verdicts: Map<number, "like" | "dislike">,
  actions: Actions,
): void {
  const cards = list.items
    .map((item) => {
      const chips = item.top_features
        .map(
          (c) =>
            `<span class="chip" title="${c.kind}">` +
            `${c.name} <b>${c.weight.toFixed(0)}</b></span>`,
        )
        .join(" ");
      const verdict = verdicts.get(item.item_id);
      return `
      <div class="card" data-item="${item.item_id}">
        <div class="rank">#${item.rank}</div>
        <div class="title">${item.title}</div>
        <div class="rating">expected ${item.expected_rating.toFixed(2)}</div>
        <div class="chips">${chips}</div>
        <div class="card-actions">
          <button class="details">Details</button>
          <button class="like ${verdict === "like" ? "active" : ""}">Like</button>
          <button class="dislike ${verdict === "dislike" ? "active" : ""}">Dislike</button>
        </div>
      </div>`;
    })
    .join("");

  root.innerHTML = `
    <section class="list-screen" data-trial="${list.trial}"
             data-readonly="${list.sliders_read_only}">
      <header>
        <h1>Recommendations - trial ${list.trial}</h1>
        <button id="next-recs">Get new recommendation</button>
      </header>
      <div class="cards">${cards}</div>
    </section>`;

  root.querySelectorAll<HTMLElement>(".card").forEach((card) => {
    const itemId = Number(card.dataset.item);
    card.querySelector(".details")!.addEventListener("click", () => {
      void actions.openDetail(itemId);
    });
    card.querySelector(".like")!.addEventListener("click", () => {
      void actions.markSatisfaction(itemId, "like");
    });
    card.querySelector(".dislike")!.addEventListener("click", () => {
      void actions.markSatisfaction(itemId, "dislike");
    });
  });
  // the quiz and self-assessment gate the next trial
  root.querySelector("#next-recs")!.addEventListener("click", () => {
    void actions.openAssessment();
  });
}

export function renderDetail(
  root: HTMLElement,
  detail: DetailPayload,
  actions: Actions,
): void {
  const disabled = detail.sliders_read_only ? "disabled" : "";
  const sliders = detail.sliders
    .map(
      (s, i) => `
      <div class="slider-row" data-index="${i}" data-kind="${s.kind}"
           data-name="${s.name}" data-before="${s.weight}">
        <label>${s.kind}:${s.name}</label>
        <input type="range" min="0" max="100" step="1"
               value="${Math.round(s.weight)}" ${disabled}
               aria-label="${s.name}">
        <span class="value">${s.weight.toFixed(0)}</span>
        <button class="commit" ${disabled}>Apply</button>
      </div>`,
    )
    .join("");

  root.innerHTML = `
    <section class="detail-screen" data-item="${detail.item_id}"
             data-readonly="${detail.sliders_read_only}">
      <header>
        <button id="back">Back to list</button>
        <h1>${detail.title}</h1>
        <div class="rating">expected ${detail.expected_rating.toFixed(2)}</div>
        ${detail.sliders_read_only
          ? '<div class="locked-note">Weights are read-only for your group.</div>'
          : ""}
      </header>
      <div class="sliders">${sliders}</div>
    </section>`;

  root.querySelector("#back")!.addEventListener("click", () => {
    void actions.backToList();
  });
  root.querySelectorAll<HTMLElement>(".slider-row").forEach((row) => {
    const input = row.querySelector("input")!;
    const value = row.querySelector(".value")!;
    input.addEventListener("input", () => {
      value.textContent = input.value;
    });
    row.querySelector(".commit")!.addEventListener("click", () => {
      const before = Number(row.dataset.before);
      const after = Number(input.value);
      if (after === before) return; // nothing to report
      void actions.submitFeedback(
        { kind: row.dataset.kind!, name: row.dataset.name! },
        before,
        after,
      );
    });
  });
}

/** Continuous 1-9 click strip used by SAM, confidence and the self rating. */
function strip(id: string, label: string): string {
  const numbers = Array.from({ length: 9 }, (_, i) => `<i>${i + 1}</i>`).join("");
  return `
    <div class="strip" id="${id}">
      <label>${label}</label>
      <div class="strip-numbers">${numbers}</div>
      <div class="strip-track" tabindex="0"></div>
      <span class="strip-value"></span>
    </div>`;
}

function wireStrip(root: HTMLElement, id: string): void {
  const track = root.querySelector<HTMLElement>(`#${id} .strip-track`)!;
  const value = root.querySelector<HTMLElement>(`#${id} .strip-value`)!;
  track.addEventListener("click", (event) => {
    const rect = track.getBoundingClientRect();
    const width = rect.width || 1;
    const x = Math.min(Math.max((event as MouseEvent).clientX - rect.left, 0), width);
    const v = 1 + 8 * (x / width);
    track.dataset.value = v.toFixed(3);
    value.textContent = v.toFixed(2);
  });
}

function stripValue(root: HTMLElement, id: string): number | null {
  const track = root.querySelector<HTMLElement>(`#${id} .strip-track`)!;
  return track.dataset.value ? Number(track.dataset.value) : null;
}

const TLX_SCALES: [string, string][] = [
  ["mental_demand", "Mental demand"],
  ["performance", "Performance"],
  ["effort", "Effort"],
  ["frustration", "Frustration"],
];

export function renderAssessment(
  root: HTMLElement,
  quiz: QuizPayload,
  list: ListPayload,
  actions: Actions,
): void {
  const quizRows = quiz.items
    .map(
      (q, i) => `
      <div class="quiz-row" data-index="${i}">
        <p>"${q.feature.kind}:${q.feature.name}" influenced the
           recommendation of <b>${q.title}</b>.</p>
        <label><input type="radio" name="judgment-${i}" value="correct"> Correct</label>
        <label><input type="radio" name="judgment-${i}" value="incorrect"> Incorrect</label>
        ${strip(`confidence-${i}`, "Confidence")}
      </div>`,
    )
    .join("");

  const tlx = TLX_SCALES.map(
    ([key, label]) => `
      <div class="tlx-row" data-key="${key}">
        <label>${label}</label>
        <input type="range" min="0" max="100" step="0.5" value="50">
        <span class="value">50</span>
      </div>`,
  ).join("");

  root.innerHTML = `
    <section class="assessment-screen" data-trial="${quiz.trial}">
      <h1>Trial ${quiz.trial} - understanding and self-assessment</h1>
      <div class="quiz">${quizRows}</div>
      <div class="sam">
        ${strip("valence", "Valence (sad - joyful)")}
        ${strip("dominance", "Dominance (submissive - in control)")}
      </div>
      <div class="tlx">${tlx}</div>
      ${strip("efficacy-self", "How effective were the explanations?")}
      <div class="form-error" role="alert" hidden></div>
      <button id="submit-assessment">Submit and continue</button>
    </section>`;

  quiz.items.forEach((_, i) => wireStrip(root, `confidence-${i}`));
  wireStrip(root, "valence");
  wireStrip(root, "dominance");
  wireStrip(root, "efficacy-self");
  root.querySelectorAll<HTMLElement>(".tlx-row").forEach((row) => {
    const input = row.querySelector("input")!;
    input.addEventListener("input", () => {
      row.querySelector(".value")!.textContent = input.value;
    });
  });

  root.querySelector("#submit-assessment")!.addEventListener("click", () => {
    const error = root.querySelector<HTMLElement>(".form-error")!;
    const answers: { judgment: "correct" | "incorrect"; confidence: number }[] =
      [];
    for (let i = 0; i < quiz.items.length; i++) {
      const chosen = root.querySelector<HTMLInputElement>(
        `input[name="judgment-${i}"]:checked`,
      );
      const confidence = stripValue(root, `confidence-${i}`);
      if (!chosen || confidence === null) {
        error.textContent =
          `Quiz item ${i + 1} needs a judgment and a confidence click.`;
        error.hidden = false;
        return;
      }
      answers.push({
        judgment: chosen.value as "correct" | "incorrect",
        confidence,
      });
    }
    const sam: Record<string, number> = {};
    for (const id of ["valence", "dominance", "efficacy-self"]) {
      const v = stripValue(root, id);
      if (v === null) {
        error.textContent = `Please click the ${id} scale.`;
        error.hidden = false;
        return;
      }
      sam[id] = v;
    }
    const scales = {
      valence: sam["valence"],
      dominance: sam["dominance"],
      efficacy_self_rating: sam["efficacy-self"],
      mental_demand: 0,
      performance: 0,
      effort: 0,
      frustration: 0,
    };
    root.querySelectorAll<HTMLElement>(".tlx-row").forEach((row) => {
      const key = row.dataset.key as
        | "mental_demand"
        | "performance"
        | "effort"
        | "frustration";
      scales[key] = Number(row.querySelector("input")!.value);
    });
    error.hidden = true;
    void actions.submitAssessment(answers, scales);
  });
}

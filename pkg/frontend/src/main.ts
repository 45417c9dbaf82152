/**
 * Entry point: session setup form, then hand over to the trial loop.
 *
 * A session id in the URL hash re-attaches to a running session, so a
 * page reload mid-trial reconstructs the view from server state alone.
 */

import { configureApi, createSession } from "./api.js";
import { actions, mount } from "./controller.js";

const API_URL = (window as unknown as { RECLOOP_API?: string }).RECLOOP_API
  ?? "http://127.0.0.1:8000";

function setupForm(root: HTMLElement): void {
  root.innerHTML = `
    <section class="setup-screen">
      <h1>recloop study session</h1>
      <form id="setup">
        <label>Group
          <select name="group">
            <option value="feedback">feedback</option>
            <option value="nonfeedback">non-feedback</option>
          </select>
        </label>
        <label>Seed <input name="seed" type="number" value="0"></label>
        <fieldset>
          <legend>Onboarding: rate five items you know (item id, 0.5-5)</legend>
          ${Array.from({ length: 5 }, (_, i) => `
            <div class="onboard-row">
              <input name="item-${i}" type="number" placeholder="item id"
                     value="${i + 1}">
              <input name="rating-${i}" type="number" min="0.5" max="5"
                     step="0.5" value="3">
            </div>`).join("")}
        </fieldset>
        <button type="submit">Start session</button>
      </form>
    </section>`;

  const form = root.querySelector<HTMLFormElement>("#setup")!;
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const data = new FormData(form);
    const onboarding = Array.from({ length: 5 }, (_, i) => ({
      item_id: Number(data.get(`item-${i}`)),
      rating: Number(data.get(`rating-${i}`)),
    }));
    void createSession({
      group: data.get("group") as "feedback" | "nonfeedback",
      seed: Number(data.get("seed")),
      onboarding,
    }).then((created) => {
      window.location.hash = created.session_id;
      return actions.start(created.session_id);
    });
  });
}

export function boot(): void {
  configureApi(API_URL);
  const root = document.getElementById("app")!;
  mount(root);
  const sid = window.location.hash.replace(/^#/, "");
  if (sid) {
    void actions.start(sid);
  } else {
    setupForm(root);
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  boot();
}

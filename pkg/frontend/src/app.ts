/** Browser bootstrap: binds the console controller to the page. */

import { ApiClient } from "./api.js";
import { Console } from "./console.js";

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) {
    throw new Error(`missing element #${id}`);
  }
  return found as T;
}

export function mount(root: Document, api: ApiClient = new ApiClient()): Console {
  const console_ = new Console(api, 2);

  const modelSelect = el<HTMLSelectElement>("model-select");
  const modelText = el<HTMLTextAreaElement>("model-text");
  const componentSelect = el<HTMLSelectElement>("component-select");

  const redraw = () => {
    const view = console_.view();
    el("banner").innerHTML = view.banner;
    el("graph").innerHTML = view.graphSvg;
    el("cause-panel").innerHTML = view.causePanel;
    el("observation-log").innerHTML = view.observationLog;
    el("history").innerHTML = view.history;
  };

  const refreshModelList = async () => {
    const models = await api.listModels();
    modelSelect.innerHTML = models
      .map((m) => `<option value="${m.id}">${m.id.slice(0, 8)} (${m.components.length} components)</option>`)
      .join("");
  };

  const populateComponents = () => {
    const nodes = console_.state.graph?.nodes ?? [];
    componentSelect.innerHTML = nodes.map((n) => `<option value="${n.id}">${n.id}</option>`).join("");
  };

  el("upload-button").addEventListener("click", () => {
    void (async () => {
      try {
        const summary = await console_.uploadModel(modelText.value);
        await refreshModelList();
        modelSelect.value = summary.id;
      } catch (err) {
        el("banner").innerHTML = `<div class="banner error">${String(err)}</div>`;
      }
    })();
  });

  el("start-session").addEventListener("click", () => {
    void (async () => {
      if (!modelSelect.value) {
        return;
      }
      await console_.openSession(modelSelect.value);
      populateComponents();
      redraw();
    })();
  });

  const observe = (status: "available" | "unavailable") => {
    void (async () => {
      if (!componentSelect.value) {
        return;
      }
      await console_.submitObservation(componentSelect.value, status);
      redraw();
    })();
  };
  el("mark-available").addEventListener("click", () => observe("available"));
  el("mark-unavailable").addEventListener("click", () => observe("unavailable"));

  void refreshModelList();
  redraw();
  return console_;
}

if (typeof document !== "undefined" && document.getElementById("graph")) {
  mount(document);
}

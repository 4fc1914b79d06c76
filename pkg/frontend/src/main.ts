import { Api } from "./api.js";
import { Controller } from "./controller.js";
import { render } from "./view.js";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");

const baseUrl = (window as unknown as { TASKMILL_API?: string }).TASKMILL_API ?? "";
const api = new Api(baseUrl);
const controller = new Controller(api, (state) => render(root, state, controller));

const form = document.getElementById("session-form") as HTMLFormElement | null;
if (form) {
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const data = new FormData(form);
    const sidecarText = String(data.get("sidecar") ?? "");
    const csvPath = String(data.get("csv") ?? "");
    void (async () => {
      await controller.createSession(JSON.parse(sidecarText), csvPath, {
        m: Number(data.get("m") ?? 20),
        k: Number(data.get("k") ?? 5),
      });
      await controller.run();
    })();
  });
}

render(root, controller.state, controller);

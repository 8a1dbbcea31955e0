import { Api } from "./api";
import { App } from "./app";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");

const app = new App(root, new Api(""));
app.start().catch((err) => {
  root.innerHTML = `<div id="banner">failed to start: ${String(err)}</div>`;
});

// handy for poking around in devtools
(window as unknown as { evoart: App }).evoart = app;

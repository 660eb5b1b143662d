/** DOM glue: wires the editor core to the page.
 *
 * The rendered patch SVG comes straight from the server; control-point
 * handles, witness triangles, and collision markers are drawn client-side on
 * an overlay <svg> that shares the server image's viewBox.
 */

import { ApiClient } from "./api.js";
import { badgeLabel, collisionMarkers, handles, witnessTriangles } from "./overlay.js";
import { EditorCore } from "./state.js";
import type { PatchFile } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, attrs: Record<string, string> = {}, text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text) node.textContent = text;
  return node;
}

function viewBoxOf(svgText: string): [number, number, number, number] {
  const match = /viewBox="([^"]+)"/.exec(svgText);
  if (!match) return [0, -1, 1, 1];
  const [a, b, c, d] = match[1].split(/\s+/).map(Number);
  return [a, b, c, d];
}

function boot(): void {
  const api = new ApiClient(
    new URLSearchParams(location.search).get("api") ?? "http://127.0.0.1:8765");
  const core = new EditorCore(api);

  const badge = el("div", { class: "badge" }, "no patch");
  const banner = el("div", { class: "banner" });
  const stage = el("div", { class: "stage" });
  const info = el("pre", { class: "info" });

  const toolbar = el("div", { class: "toolbar" });
  const templates: Array<[string, () => Promise<void>]> = [
    ["square", () => core.loadTemplate("tensor", 1, 1)],
    ["tensor 3x3", () => core.loadTemplate("tensor", 3, 3)],
    ["triangle 3", () => core.loadTemplate("triangle", 3)],
  ];
  for (const [label, action] of templates) {
    const btn = el("button", {}, label);
    btn.onclick = () => action().catch(() => undefined);
    toolbar.append(btn);
  }
  const fileInput = el("input", { type: "file", accept: ".json" });
  fileInput.onchange = async () => {
    const file = fileInput.files?.[0];
    if (!file) return;
    try {
      const patch = JSON.parse(await file.text()) as PatchFile;
      await core.loadPatch(patch);
    } catch (err) {
      banner.textContent = `load rejected: ${(err as Error).message}`;
    }
  };
  const undoBtn = el("button", {}, "undo");
  undoBtn.onclick = () => core.undo();
  const stressBtn = el("button", {}, "stress (20 trials)");
  stressBtn.onclick = () => void core.runStress().catch(() => undefined);
  const spread = el("input", { type: "range", min: "1", max: "1000", value: "100" });
  spread.oninput = () => core.setSpread(Number(spread.value));
  toolbar.append(fileInput, undoBtn, stressBtn, spread);

  document.body.append(toolbar, badge, banner, stage, info);

  let overlay: SVGSVGElement | null = null;
  let dragging: number | null = null;

  const toImage = (ev: PointerEvent): [number, number] => {
    const box = overlay!.getBoundingClientRect();
    const [vx, vy, vw, vh] = overlay!.getAttribute("viewBox")!.split(/\s+/).map(Number);
    const x = vx + ((ev.clientX - box.left) / box.width) * vw;
    const y = vy + ((ev.clientY - box.top) / box.height) * vh;
    return [x, -y]; // the server image flips y for SVG
  };

  core.onChange((state) => {
    badge.textContent = badgeLabel(state);
    badge.dataset.verdict = state.badge;
    banner.textContent = state.banner ?? "";
    if (!state.patch) return;

    stage.innerHTML = state.svg;
    const base = stage.querySelector("svg");
    if (!base) return;
    overlay = document.createElementNS(SVG_NS, "svg");
    overlay.setAttribute("viewBox", base.getAttribute("viewBox") ?? "0 0 1 1");
    overlay.setAttribute("class", "overlay");
    const [, , vw, vh] = viewBoxOf(state.svg);
    const r = 0.018 * Math.max(vw, vh);

    for (const tri of witnessTriangles(state)) {
      const poly = document.createElementNS(SVG_NS, "polygon");
      poly.setAttribute("points",
        tri.points.map(([x, y]) => `${x},${-y}`).join(" "));
      poly.setAttribute("fill", tri.fragile ? "rgba(255,191,0,.35)" : "rgba(214,39,40,.35)");
      poly.setAttribute("stroke", tri.fragile ? "#cc9900" : "#d62728");
      poly.setAttribute("stroke-width", String(0.3 * r));
      overlay.append(poly);
    }
    for (const mark of collisionMarkers(state)) {
      const line = document.createElementNS(SVG_NS, "line");
      line.setAttribute("x1", String(mark.p[0]));
      line.setAttribute("y1", String(-mark.p[1]));
      line.setAttribute("x2", String(mark.q[0]));
      line.setAttribute("y2", String(-mark.q[1]));
      line.setAttribute("stroke", mark.onBoundary ? "#9467bd" : "#e31a1c");
      line.setAttribute("stroke-width", String(0.35 * r));
      overlay.append(line);
    }
    for (const handle of handles(state)) {
      const dot = document.createElementNS(SVG_NS, "circle");
      dot.setAttribute("cx", String(handle.x));
      dot.setAttribute("cy", String(-handle.y));
      dot.setAttribute("r", String(handle.flagged ? 1.4 * r : r));
      dot.setAttribute("fill", handle.flagged ? "#ff7f0e" : "#2ca02c");
      dot.setAttribute("data-index", String(handle.index));
      dot.setAttribute("class", "handle");
      dot.addEventListener("pointerdown", (ev) => {
        dragging = handle.index;
        core.beginDrag(handle.index);
        (ev.target as Element).setPointerCapture(ev.pointerId);
      });
      overlay.append(dot);
    }
    overlay.addEventListener("pointermove", (ev) => {
      if (dragging === null) return;
      const [x, y] = toImage(ev);
      core.dragPoint(dragging, x, y);
    });
    overlay.addEventListener("pointerup", () => {
      if (dragging === null) return;
      dragging = null;
      core.endDrag();
    });
    stage.append(overlay);

    const rep = state.report;
    info.textContent = rep
      ? `verdict: ${rep.verdict}\nglobal sign: ${rep.global_sign}\n` +
        `triples checked: ${rep.triples_checked}\n` +
        `witnesses: ${rep.witnesses.length}  fragile: ${rep.fragile_triples.length}\n` +
        (state.stress
          ? `stress: ${state.stress.agreements}/${state.stress.trials} trials agree`
          : "")
      : "";
  });
}

boot();

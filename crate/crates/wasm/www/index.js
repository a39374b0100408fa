// Built with `wasm-pack build crates/wasm --target web --out-dir www/pkg`.
import init, { catalog_json, instance_document, solve, value_curve, simulate } from "./pkg/mabarc_wasm.js";

const $ = (id) => document.getElementById(id);

function call(fn, ...args) {
  const out = JSON.parse(fn(...args));
  if (out.error) throw new Error(out.error);
  return out;
}

function source() {
  const doc = $("doc").value.trim();
  if (doc) return [doc, NaN];
  const eps = $("eps").value === "" ? NaN : Number($("eps").value);
  return ["catalog:" + $("catalog").value, eps];
}

function show(el, f) {
  el.classList.remove("error");
  try {
    f();
  } catch (e) {
    el.classList.add("error");
    el.textContent = e.message;
  }
}

function table(m) {
  return m.map((row) => row.map((v) => v.toFixed(4).padStart(8)).join(" ")).join("\n");
}

function fmtSet(s) {
  const parts = s.saturated_arms.map(String).concat(s.zero_pairs.map(([k, c]) => `(${k},${c})`));
  return "{" + parts.join(", ") + "}";
}

// Line plot of several series sharing an x axis; null breaks a line.
function plot(canvas, xs, series, marker) {
  const ctx = canvas.getContext("2d");
  const { width: W, height: H } = canvas;
  const pad = 40;
  ctx.clearRect(0, 0, W, H);
  const ys = series.flatMap((s) => s.values.filter((v) => v !== null));
  const ymax = Math.max(1e-12, ...ys);
  const xmax = Math.max(1e-12, ...xs);
  const px = (x) => pad + ((W - 2 * pad) * x) / xmax;
  const py = (y) => H - pad - ((H - 2 * pad) * y) / ymax;
  ctx.strokeStyle = "#999";
  ctx.beginPath();
  ctx.moveTo(pad, pad / 2);
  ctx.lineTo(pad, H - pad);
  ctx.lineTo(W - pad / 2, H - pad);
  ctx.stroke();
  ctx.fillStyle = "#333";
  ctx.font = "11px sans-serif";
  ctx.fillText(ymax.toPrecision(3), 2, py(ymax) + 4);
  ctx.fillText("0", pad - 12, H - pad + 4);
  ctx.fillText(xmax.toPrecision(3), W - pad - 10, H - pad + 14);
  if (marker !== undefined) {
    ctx.strokeStyle = "#bbb";
    ctx.setLineDash([4, 4]);
    ctx.beginPath();
    ctx.moveTo(px(marker), pad / 2);
    ctx.lineTo(px(marker), H - pad);
    ctx.stroke();
    ctx.setLineDash([]);
  }
  series.forEach((s, i) => {
    ctx.strokeStyle = s.color;
    ctx.beginPath();
    let pen = false;
    s.values.forEach((v, j) => {
      if (v === null) {
        pen = false;
        return;
      }
      pen ? ctx.lineTo(px(xs[j]), py(v)) : ctx.moveTo(px(xs[j]), py(v));
      pen = true;
    });
    ctx.stroke();
    ctx.fillStyle = s.color;
    ctx.fillText(s.label, W - 150, 14 + 14 * i);
  });
}

function onSolve() {
  const out = $("solve-out");
  show(out, () => {
    const r = call(solve, ...source(), $("gaps").checked);
    const w = r.w_star ?? r.allocation;
    let text = `${r.instance}\nf* = ${r.f_star}\nw* =\n${table(w)}\nI* = ${fmtSet(r.active_set)}`;
    if (r.gamma_star !== undefined) {
      text += `\ngamma* = ${r.gamma_star}\nrho* = ${r.rho_star ?? "-"}`;
      for (const g of r.per_set_gaps) text += `\n  ${fmtSet(g.set).padEnd(36)} rho = ${g.rho.toFixed(6)}`;
    }
    out.textContent = text;
  });
}

function onCurve() {
  const canvas = $("curve-plot");
  const ctx = canvas.getContext("2d");
  try {
    const r = call(value_curve, ...source(), Number($("arm").value) - 1, 200);
    const xs = r.points.map((p) => p.threshold);
    plot(canvas, xs, [{ label: `f* vs threshold of arm ${r.arm}`, color: "#1f77b4", values: r.points.map((p) => p.f_star) }], r.current);
  } catch (e) {
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    ctx.fillStyle = "#b00";
    ctx.fillText(e.message, 10, 20);
  }
}

function onSimulate() {
  const out = $("sim-out");
  show(out, () => {
    const r = call(simulate, ...source(), $("alg").value, BigInt($("horizon").value), BigInt($("seed").value), 400);
    const modes = Object.entries(r.modes).map(([m, n]) => `${m} ${n}`).join(", ");
    out.textContent =
      `${r.algorithm} on ${r.instance}, T = ${r.horizon}\n` +
      `regret ${r.regret.toFixed(3)}  violation ${r.violation.toFixed(3)}  reward ${r.reward.toFixed(1)}\n` +
      `pulls ${r.pulls.join(" / ")}\nmodes ${modes}\nlast allocation\n${table(r.final_allocation)}`;
    plot($("sim-plot"), r.series.t, [
      { label: "cumulative regret", color: "#1f77b4", values: r.series.cum_regret },
      { label: "cumulative violation", color: "#d62728", values: r.series.cum_violation },
    ]);
  });
}

await init();
const entries = call(catalog_json);
for (const e of entries) {
  const opt = document.createElement("option");
  opt.value = e.name;
  opt.textContent = e.name;
  opt.title = e.description;
  $("catalog").append(opt);
}
$("catalog").value = "nu_sim";
$("catalog").onchange = () => {
  const e = entries.find((x) => x.name === $("catalog").value);
  $("eps").value = e.default ?? "";
  $("eps").disabled = e.param === null;
  $("doc").value = "";
};
$("catalog").onchange();
$("load").onclick = () => {
  const [src, eps] = source();
  if (!src.startsWith("catalog:")) return;
  show($("solve-out"), () => {
    $("doc").value = call(instance_document, src, eps).document;
  });
};
$("solve").onclick = onSolve;
$("curve").onclick = onCurve;
$("simulate").onclick = onSimulate;

import init, { solve, branch, oracle } from "./pkg/fraclap_demo.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

function plot(canvas, series, opts = {}) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 40;
  ctx.clearRect(0, 0, w, h);
  const xs = series.flatMap(s => s.x), ys = series.flatMap(s => s.y);
  let [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  let [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  if (y1 - y0 < 1e-9) { y0 -= 1; y1 += 1; }
  const sx = x => pad + (x - x0) / (x1 - x0 || 1) * (w - 2 * pad);
  const sy = y => h - pad - (y - y0) / (y1 - y0) * (h - 2 * pad);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#333";
  ctx.fillText(x0.toPrecision(3), pad, h - pad + 14);
  ctx.fillText(x1.toPrecision(3), w - pad - 20, h - pad + 14);
  ctx.fillText(y1.toPrecision(3), 2, pad + 4);
  ctx.fillText(y0.toPrecision(3), 2, h - pad);
  if (opts.xlabel) ctx.fillText(opts.xlabel, w / 2, h - 8);
  series.forEach((s, i) => {
    ctx.strokeStyle = s.color || COLORS[i % COLORS.length];
    ctx.setLineDash(s.dash || []);
    ctx.beginPath();
    s.x.forEach((x, j) => j ? ctx.lineTo(sx(x), sy(s.y[j])) : ctx.moveTo(sx(x), sy(s.y[j])));
    ctx.stroke();
    (s.marks || []).forEach(j => {
      ctx.fillStyle = "#000";
      ctx.beginPath();
      ctx.arc(sx(s.x[j]), sy(s.y[j]), 4, 0, 2 * Math.PI);
      ctx.fill();
    });
  });
  ctx.setLineDash([]);
}

function guard(status, f) {
  try {
    f();
  } catch (e) {
    status.textContent = "error: " + e;
  }
}

await init();

const cfg = document.getElementById("config");
const status = document.getElementById("status");
const canvas = document.getElementById("plot");

document.getElementById("solve").onclick = () => guard(status, () => {
  const r = JSON.parse(solve(cfg.value));
  plot(canvas, r.solutions.map(s => ({ x: r.x, y: s.u })), { xlabel: "x" });
  status.textContent = r.solutions.length + " solution(s)\n" +
    r.solutions.map((s, i) => `#${i}  mean ${s.mean.toFixed(6)}  residual ${s.residual.toExponential(2)}`).join("\n");
});

document.getElementById("branch").onclick = () => guard(status, () => {
  const r = JSON.parse(branch(cfg.value));
  const t = r.points.map(p => p.t);
  plot(canvas, [
    { x: t, y: r.points.map(p => p.mean), marks: r.folds },
    { x: t, y: r.points.map(p => p.min), dash: [4, 4] },
    { x: t, y: r.points.map(p => p.max), dash: [4, 4] },
  ], { xlabel: "t" });
  status.textContent = `${r.points.length} points, folds at ${JSON.stringify(r.folds)}` +
    (r.t1 === null ? "" : `, t1 = ${r.t1.toPrecision(10)}`);
});

const order = document.getElementById("order");
order.oninput = () => { document.getElementById("order-val").textContent = order.value; };
const ostatus = document.getElementById("oracle-status");
document.getElementById("oracle").onclick = () => guard(ostatus, () => {
  const r = JSON.parse(oracle(document.getElementById("field").value, parseFloat(order.value), 128));
  plot(document.getElementById("oracle-plot"), [
    { x: r.x, y: r.u, color: "#aaa" },
    { x: r.x, y: r.spectral },
    { x: r.x, y: r.pv, dash: [6, 4], color: "#d62728" },
  ], { xlabel: "x" });
  ostatus.textContent = `max |pv - spectral| = ${r.max_diff.toExponential(3)}  (${r.panels} panels, ${r.images} images)`;
});

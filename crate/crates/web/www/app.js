import init, { cat_theta, coupled_sweep, evl_curve } from "./pkg/hypex_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function axes(ctx, w, h, pad) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
}

// x in [x0, x1], y in [0, 1]
function plot(canvas, series, x0, x1) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 30;
  axes(ctx, w, h, pad);
  const sx = (x) => pad + ((x - x0) / (x1 - x0)) * (w - 2 * pad);
  const sy = (y) => h - pad - y * (h - 2 * pad);
  ctx.fillStyle = "#555";
  ctx.fillText(String(x0), pad, h - 10);
  ctx.fillText(String(x1), w - pad - 10, h - 10);
  ctx.fillText("1", 10, pad + 4);
  ctx.fillText("0", 10, h - pad);
  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.fillStyle = s.color;
    ctx.beginPath();
    s.points.forEach(([x, y], i) => (i ? ctx.lineTo(sx(x), sy(y)) : ctx.moveTo(sx(x), sy(y))));
    if (s.line) ctx.stroke();
    for (const [x, y, e] of s.points) {
      ctx.fillRect(sx(x) - 2, sy(y) - 2, 4, 4);
      if (e) {
        ctx.beginPath();
        ctx.moveTo(sx(x), sy(y - e));
        ctx.lineTo(sx(x), sy(y + e));
        ctx.stroke();
      }
    }
  }
}

function drawTorusSegment(canvas, p1, p2) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  axes(ctx, w, h, 0);
  ctx.strokeStyle = "#c33";
  ctx.lineWidth = 2;
  // draw the segment and the lattice translates that cross the unit square
  for (let kx = -1; kx <= 1; kx++) {
    for (let ky = -1; ky <= 1; ky++) {
      ctx.beginPath();
      ctx.moveTo((p1[0] + kx) * w, h - (p1[1] + ky) * h);
      ctx.lineTo((p2[0] + kx) * w, h - (p2[1] + ky) * h);
      ctx.stroke();
    }
  }
  ctx.lineWidth = 1;
}

function guard(f) {
  try {
    $("status").textContent = "";
    f();
  } catch (e) {
    $("status").textContent = String(e);
    $("status").className = "err";
  }
}

function runCat() {
  guard(() => {
    const r = JSON.parse(cat_theta(num("cx"), num("cy"), $("dir").value, num("len"), num("cat-n"), 1));
    drawTorusSegment($("cat-canvas"), r.segment.p1, r.segment.p2);
    const p = r.prediction;
    $("cat-out").textContent =
      `prediction ${p.value.toFixed(4)} [${p.lo.toFixed(4)}, ${p.hi.toFixed(4)}] ${p.case_label}` +
      (p.inconclusive ? " (inconclusive)" : "") +
      `\nestimate   ${r.mean.toFixed(4)} ± ${r.spread.toFixed(4)} over ${r.estimates.length} realizations`;
  });
}

function runCoupled() {
  guard(() => {
    const r = JSON.parse(coupled_sweep(num("m"), num("slope"), num("noise"), num("cm-n"), num("cm-reps"), 1));
    const g = r.points.map((p) => p.gamma);
    plot(
      $("cm-canvas"),
      [
        { color: "#36c", line: true, points: r.points.map((p) => [p.gamma, p.predicted]) },
        { color: "#c33", line: false, points: r.points.map((p) => [p.gamma, p.mean, p.spread]) },
      ],
      0,
      Math.max(...g) + 0.05,
    );
  });
}

function runEvl() {
  guard(() => {
    const r = JSON.parse(evl_curve(num("evl-n"), num("evl-reps"), 1));
    plot(
      $("evl-canvas"),
      [
        { color: "#36c", line: true, points: r.points.map((p) => [p.tau, p.limit]) },
        { color: "#c33", line: false, points: r.points.map((p) => [p.tau, p.p, p.stderr]) },
      ],
      0,
      3,
    );
  });
}

await init();
$("cat-run").onclick = runCat;
$("cm-run").onclick = runCoupled;
$("evl-run").onclick = runEvl;
runCat();

import init, { reupload_curve, fold_plan, synthetic_series } from "./pkg/qtraffic_demo.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const ROLE_COLORS = ["#9ecae1", "#fdae6b", "#e6550d", "#ddd"];

function line(canvas, ys, lo, hi, color) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#bbb";
  ctx.beginPath();
  const y0 = h - ((0 - lo) / (hi - lo)) * h;
  ctx.moveTo(0, y0);
  ctx.lineTo(w, y0);
  ctx.stroke();
  ctx.strokeStyle = color;
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  ys.forEach((y, i) => {
    const px = (i / (ys.length - 1)) * w;
    const py = h - ((y - lo) / (hi - lo)) * h;
    i ? ctx.lineTo(px, py) : ctx.moveTo(px, py);
  });
  ctx.stroke();
}

function guard(errId, fn) {
  try {
    $(errId).textContent = "";
    fn();
  } catch (e) {
    $(errId).textContent = String(e);
  }
}

function drawCurve() {
  guard("rerr", () => {
    const ys = reupload_curve(num("rq"), num("rb"), num("rs"), num("rseed"), 400);
    line($("rc"), ys, -1.05, 1.05, "#1f77b4");
  });
}

function drawPlan() {
  guard("ferr", () => {
    const n = num("fn"), k = num("fk");
    const roles = fold_plan(n, k, num("fg"), num("fv"));
    const c = $("fc"), ctx = c.getContext("2d");
    ctx.clearRect(0, 0, c.width, c.height);
    const rowH = c.height / k;
    for (let f = 0; f < k; f++) {
      for (let i = 0; i < n; i++) {
        ctx.fillStyle = ROLE_COLORS[roles[f * n + i]];
        const x0 = Math.floor((i / n) * c.width), x1 = Math.ceil(((i + 1) / n) * c.width);
        ctx.fillRect(x0, f * rowH + 2, x1 - x0, rowH - 4);
      }
    }
  });
}

function drawSeries() {
  guard("serr", () => {
    const ys = synthetic_series(num("sd"), num("sn"), num("ss"));
    line($("sc"), ys, 0, Math.max(...ys) * 1.05, "#2ca02c");
  });
}

await init();
for (const [ids, fn] of [[["rq", "rb", "rs", "rseed"], drawCurve], [["fn", "fk", "fg", "fv"], drawPlan], [["sd", "sn", "ss"], drawSeries]]) {
  ids.forEach((id) => $(id).addEventListener("input", fn));
  fn();
}

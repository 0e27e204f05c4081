import init, {
  ess_explore,
  replicator_field,
  replicator_trajectory,
  spne_curve,
  limit_curve,
} from "./pkg/mpmr_wasm.js";

const $ = (id) => document.getElementById(id);
const fmt = (x) => x.toFixed(4);

function clear(ctx) {
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
}

// ESS explorer

function drawEss() {
  const err = $("ess-error");
  err.textContent = "";
  const offers = $("ess-offers").value.split(",").map((v) => parseFloat(v.trim()));
  const l = parseInt($("ess-l").value, 10);
  const ctx = $("ess-canvas").getContext("2d");
  clear(ctx);
  let out;
  try {
    out = ess_explore(new Float64Array(offers), l);
  } catch (e) {
    err.textContent = String(e);
    $("ess-table").innerHTML = "";
    return;
  }
  const k = offers.length;
  const probs = out.slice(0, k);
  const proposer = out.slice(k, 2 * k);
  const visit = out.slice(2 * k, 3 * k);
  const responder = out[3 * k];

  const { width, height } = ctx.canvas;
  const slot = width / k;
  const bar = Math.min(80, slot * 0.6);
  ctx.font = "13px system-ui";
  ctx.textAlign = "center";
  probs.forEach((p, i) => {
    const x = slot * i + slot / 2;
    const h = p * (height - 50);
    ctx.fillStyle = p > 0 ? "#3a7bd5" : "#ccc";
    ctx.fillRect(x - bar / 2, height - 25 - h, bar, h);
    ctx.fillStyle = "#222";
    ctx.fillText(`s=${offers[i]}`, x, height - 8);
    ctx.fillText(fmt(p), x, height - 30 - h);
  });

  const rows = probs
    .map((p, i) => `<tr><td>${i + 1}</td><td>${offers[i]}</td><td>${fmt(p)}</td><td>${fmt(proposer[i])}</td><td>${fmt(visit[i])}</td></tr>`)
    .join("");
  $("ess-table").innerHTML =
    "<tr><th>proposer</th><th>offer</th><th>visit probability</th><th>proposer payoff</th><th>payoff of visiting</th></tr>" +
    rows +
    `<tr><td colspan="4">responder payoff at the ESS</td><td>${fmt(responder)}</td></tr>`;
}

// Replicator simplex. Barycentric (x1, x2, x3) maps to the triangle with
// x1 at the top, x2 bottom-left, x3 bottom-right.

const corners = (w, h) => ({
  top: [w / 2, 30],
  left: [40, h - 40],
  right: [w - 40, h - 40],
});

function toCanvas(p, c) {
  return [
    p[0] * c.top[0] + p[1] * c.left[0] + p[2] * c.right[0],
    p[0] * c.top[1] + p[1] * c.left[1] + p[2] * c.right[1],
  ];
}

function fromCanvas(x, y, c) {
  const [x1, y1] = c.top, [x2, y2] = c.left, [x3, y3] = c.right;
  const det = (y2 - y3) * (x1 - x3) + (x3 - x2) * (y1 - y3);
  const a = ((y2 - y3) * (x - x3) + (x3 - x2) * (y - y3)) / det;
  const b = ((y3 - y1) * (x - x3) + (x1 - x3) * (y - y3)) / det;
  return [a, b, 1 - a - b];
}

function repParams() {
  const s = parseFloat($("rep-s").value);
  const delta = parseFloat($("rep-d").value) * s;
  $("rep-s-val").textContent = s.toFixed(2);
  $("rep-d-val").textContent = delta.toFixed(3);
  return { s, delta };
}

function drawField() {
  const { s, delta } = repParams();
  const ctx = $("rep-canvas").getContext("2d");
  const c = corners(ctx.canvas.width, ctx.canvas.height);
  clear(ctx);
  ctx.strokeStyle = "#444";
  ctx.beginPath();
  ctx.moveTo(...c.top);
  ctx.lineTo(...c.left);
  ctx.lineTo(...c.right);
  ctx.closePath();
  ctx.stroke();

  let field;
  try {
    field = replicator_field(s, delta, 18);
    $("rep-error").textContent = "";
  } catch (e) {
    $("rep-error").textContent = String(e);
    return;
  }
  let maxMag = 0;
  for (let i = 0; i < field.length; i += 6) {
    maxMag = Math.max(maxMag, Math.hypot(field[i + 3], field[i + 4], field[i + 5]));
  }
  ctx.strokeStyle = "#7a7a7a";
  for (let i = 0; i < field.length; i += 6) {
    const p = [field[i], field[i + 1], field[i + 2]];
    const d = [field[i + 3], field[i + 4], field[i + 5]];
    const mag = Math.hypot(...d);
    if (mag < 1e-12) continue;
    const scale = (0.03 * Math.sqrt(mag / maxMag)) / mag;
    const q = [p[0] + d[0] * scale, p[1] + d[1] * scale, p[2] + d[2] * scale];
    const [ax, ay] = toCanvas(p, c);
    const [bx, by] = toCanvas(q, c);
    ctx.beginPath();
    ctx.moveTo(ax, ay);
    ctx.lineTo(bx, by);
    ctx.stroke();
    ctx.fillStyle = "#7a7a7a";
    ctx.beginPath();
    ctx.arc(bx, by, 1.8, 0, 2 * Math.PI);
    ctx.fill();
  }

  // line of rest points
  const x2max = (2 * delta + s) / (delta + 2 * s);
  const end = [1 - x2max * (delta + 2 * s) / (2 * delta + s), x2max, x2max * (s - delta) / (2 * delta + s)];
  ctx.strokeStyle = "#d33";
  ctx.lineWidth = 2.5;
  ctx.beginPath();
  ctx.moveTo(...toCanvas([1, 0, 0], c));
  ctx.lineTo(...toCanvas(end, c));
  ctx.stroke();
  ctx.lineWidth = 1;
}

function launch(event) {
  const canvas = $("rep-canvas");
  const rect = canvas.getBoundingClientRect();
  const x = ((event.clientX - rect.left) * canvas.width) / rect.width;
  const y = ((event.clientY - rect.top) * canvas.height) / rect.height;
  const c = corners(canvas.width, canvas.height);
  const p = fromCanvas(x, y, c);
  if (p.some((v) => v < 0)) return;
  const { s, delta } = repParams();
  let out;
  try {
    out = replicator_trajectory(s, delta, p[0], p[1], 1500, 600);
  } catch (e) {
    $("rep-error").textContent = String(e);
    return;
  }
  const ctx = canvas.getContext("2d");
  ctx.strokeStyle = "#1b8a3a";
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  for (let i = 0; i + 2 < out.length - 1; i += 3) {
    const [cx, cy] = toCanvas([out[i], out[i + 1], out[i + 2]], c);
    if (i === 0) ctx.moveTo(cx, cy);
    else ctx.lineTo(cx, cy);
  }
  ctx.stroke();
  ctx.lineWidth = 1;
  const n = out.length - 1;
  $("rep-status").textContent =
    `end point (${fmt(out[n - 3])}, ${fmt(out[n - 2])}, ${fmt(out[n - 1])}), distance to the line ${out[n].toExponential(2)}`;
}

// Offer curves

function axes(ctx, xmin, xmax, ymin, ymax, xlabel, ylabel) {
  const { width, height } = ctx.canvas;
  const pad = { l: 45, r: 10, t: 10, b: 35 };
  const sx = (x) => pad.l + ((x - xmin) / (xmax - xmin)) * (width - pad.l - pad.r);
  const sy = (y) => height - pad.b - ((y - ymin) / (ymax - ymin)) * (height - pad.t - pad.b);
  ctx.strokeStyle = "#444";
  ctx.beginPath();
  ctx.moveTo(pad.l, pad.t);
  ctx.lineTo(pad.l, height - pad.b);
  ctx.lineTo(width - pad.r, height - pad.b);
  ctx.stroke();
  ctx.fillStyle = "#222";
  ctx.font = "12px system-ui";
  ctx.textAlign = "center";
  ctx.fillText(xlabel, (pad.l + width - pad.r) / 2, height - 6);
  for (let i = 0; i <= 4; i++) {
    const y = ymin + ((ymax - ymin) * i) / 4;
    ctx.textAlign = "right";
    ctx.fillText(y.toFixed(2), pad.l - 4, sy(y) + 4);
  }
  ctx.save();
  ctx.translate(12, height / 2);
  ctx.rotate(-Math.PI / 2);
  ctx.textAlign = "center";
  ctx.fillText(ylabel, 0, 0);
  ctx.restore();
  return { sx, sy };
}

function polyline(ctx, pts, color) {
  ctx.strokeStyle = color;
  ctx.lineWidth = 2;
  ctx.beginPath();
  pts.forEach(([x, y], i) => (i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y)));
  ctx.stroke();
  ctx.lineWidth = 1;
}

function drawOffers() {
  const l = parseInt($("off-l").value, 10);
  $("off-l-val").textContent = l;
  const kMax = 64;
  const offers = spne_curve(kMax, l);
  const left = $("off-k").getContext("2d");
  clear(left);
  const a = axes(left, 2, kMax, 0, 1, "proposers K", "offer");
  polyline(left, Array.from(offers, (s, i) => [a.sx(i + 2), a.sy(s)]), "#3a7bd5");

  const curve = limit_curve(0.05, 20, 200);
  const right = $("off-c").getContext("2d");
  clear(right);
  const lo = Math.log10(0.05), hi = Math.log10(20);
  const b = axes(right, lo, hi, 0, 1, "log10 c", "share");
  const series = [[], [], []];
  for (let i = 0; i < curve.length; i += 4) {
    const x = b.sx(Math.log10(curve[i]));
    series[0].push([x, b.sy(curve[i + 1])]);
    series[1].push([x, b.sy(curve[i + 2])]);
    series[2].push([x, b.sy(curve[i + 3])]);
  }
  polyline(right, series[0], "#3a7bd5");
  polyline(right, series[1], "#d37b1a");
  polyline(right, series[2], "#1b8a3a");
}

async function main() {
  await init();
  $("ess-offers").addEventListener("input", drawEss);
  $("ess-l").addEventListener("input", drawEss);
  $("rep-s").addEventListener("input", drawField);
  $("rep-d").addEventListener("input", drawField);
  $("rep-canvas").addEventListener("click", launch);
  $("off-l").addEventListener("input", drawOffers);
  drawEss();
  drawField();
  drawOffers();
}

main();

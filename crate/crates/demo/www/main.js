// Built by `wasm-pack build crates/demo --target web --out-dir www/pkg`.
import init, { procrustes_2d, rotation_recovery, hubness } from "./pkg/termalign_demo.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function show(id, fn) {
  const out = $(id);
  try {
    const result = JSON.parse(fn());
    out.classList.remove("err");
    return result;
  } catch (e) {
    out.textContent = String(e.message ?? e);
    out.classList.add("err");
    return null;
  }
}

function scatter(ctx, pts, color, scale, cx, cy) {
  ctx.fillStyle = color;
  for (const [x, y] of pts) {
    ctx.beginPath();
    ctx.arc(cx + x * scale, cy - y * scale, 3, 0, 2 * Math.PI);
    ctx.fill();
  }
}

function drawPlane() {
  const r = show("p-out", () =>
    procrustes_2d(num("p-n"), num("p-angle"), num("p-noise"), $("p-reflect").checked, num("p-seed")));
  if (!r) return;
  const c = $("p-canvas");
  const ctx = c.getContext("2d");
  ctx.clearRect(0, 0, c.width, c.height);
  const all = r.source.concat(r.target, r.mapped).flat().map(Math.abs);
  const scale = (c.width / 2 - 10) / Math.max(1e-9, ...all);
  ctx.strokeStyle = "#ccc";
  for (let i = 0; i < r.target.length; i++) {
    ctx.beginPath();
    ctx.moveTo(c.width / 2 + r.mapped[i][0] * scale, c.height / 2 - r.mapped[i][1] * scale);
    ctx.lineTo(c.width / 2 + r.target[i][0] * scale, c.height / 2 - r.target[i][1] * scale);
    ctx.stroke();
  }
  scatter(ctx, r.source, "#999", scale, c.width / 2, c.height / 2);
  scatter(ctx, r.target, "#2260c0", scale, c.width / 2, c.height / 2);
  scatter(ctx, r.mapped, "#d03030", scale, c.width / 2, c.height / 2);
  $("p-out").textContent =
    `recovered angle ${r.angle.toFixed(2)} deg, reflection ${r.reflection}, residual ${r.residual.toFixed(4)}`;
}

function drawRecovery() {
  const r = show("r-out", () =>
    rotation_recovery(num("r-n"), num("r-d"), num("r-noise"), num("r-frac"), num("r-iters"), num("r-seed")));
  if (!r) return;
  const c = $("r-canvas");
  const ctx = c.getContext("2d");
  ctx.clearRect(0, 0, c.width, c.height);
  const top = Math.max(1e-12, ...r.residuals);
  const step = (c.width - 20) / Math.max(1, r.residuals.length - 1);
  ctx.strokeStyle = "#2260c0";
  ctx.beginPath();
  r.residuals.forEach((v, i) => {
    const x = 10 + i * step;
    const y = c.height - 10 - (v / top) * (c.height - 20);
    i ? ctx.lineTo(x, y) : ctx.moveTo(x, y);
  });
  ctx.stroke();
  $("r-out").textContent =
    `${r.anchors} anchors, ${r.held_out} held-out words\n` +
    `P@1 ${r.p_at_1.toFixed(3)}  P@5 ${r.p_at_5.toFixed(3)}\n` +
    `|W - Q|_F ${r.distance_to_truth.toExponential(2)}, orthogonality error ${r.orthogonality_error.toExponential(2)}\n` +
    `dictionary sizes ${r.dictionary_sizes.join(" ")}`;
}

function drawHubness() {
  const r = show("h-out", () => hubness(num("h-n"), num("h-d"), num("h-k"), num("h-seed")));
  if (!r) return;
  const c = $("h-canvas");
  const ctx = c.getContext("2d");
  ctx.clearRect(0, 0, c.width, c.height);
  const bins = Math.max(r.cosine_histogram.length, r.csls_histogram.length);
  const top = Math.max(...r.cosine_histogram, ...r.csls_histogram);
  const w = (c.width - 20) / bins;
  const bar = (h, i, dx, color) => {
    const height = ((h ?? 0) / top) * (c.height - 20);
    ctx.fillStyle = color;
    ctx.fillRect(10 + i * w + dx, c.height - 10 - height, w / 2 - 1, height);
  };
  for (let i = 0; i < bins; i++) {
    bar(r.cosine_histogram[i], i, 0, "#d03030");
    bar(r.csls_histogram[i], i, w / 2, "#2260c0");
  }
  $("h-out").textContent =
    `red: cosine   max hits ${r.cosine_max}, never retrieved ${r.cosine_never_retrieved}, skewness ${r.cosine_skewness.toFixed(2)}\n` +
    `blue: CSLS    max hits ${r.csls_max}, never retrieved ${r.csls_never_retrieved}, skewness ${r.csls_skewness.toFixed(2)}`;
}

await init();
for (const id of ["p-n", "p-angle", "p-noise", "p-reflect", "p-seed"]) $(id).addEventListener("input", drawPlane);
$("r-run").addEventListener("click", drawRecovery);
$("h-run").addEventListener("click", drawHubness);
drawPlane();

import init, { basisCurves, indexSet, solveCurve } from './pkg/qrbsde_demo.js';

const $ = (id) => document.getElementById(id);

function frame(ctx, w, h) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = '#ddd';
  ctx.beginPath();
  ctx.moveTo(0, h / 2);
  ctx.lineTo(w, h / 2);
  ctx.stroke();
}

function polyline(ctx, xs, ys, sx, sy, color, width) {
  ctx.strokeStyle = color;
  ctx.lineWidth = width;
  ctx.beginPath();
  xs.forEach((x, j) => (j ? ctx.lineTo(sx(x), sy(ys[j])) : ctx.moveTo(sx(x), sy(ys[j]))));
  ctx.stroke();
}

function drawBasis() {
  const mu = parseFloat($('b-mu').value);
  const k = parseInt($('b-k').value, 10);
  $('b-mu-v').textContent = mu.toFixed(1);
  $('b-k-v').textContent = k;
  const n = 400, lo = -8, hi = 8;
  const flat = basisCurves(mu, k, lo, hi, n);
  const row = (r) => flat.subarray(r * n, (r + 1) * n);
  const xs = Array.from({ length: n }, (_, j) => lo + ((hi - lo) * j) / (n - 1));
  const c = $('b-canvas'), ctx = c.getContext('2d');
  frame(ctx, c.width, c.height);
  const sx = (x) => ((x - lo) / (hi - lo)) * c.width;
  const sy = (y) => c.height / 2 - (y / 1.6) * (c.height / 2);
  const pdf = row(0);
  const peak = Math.max(...pdf);
  polyline(ctx, xs, Array.from(pdf, (v) => (1.4 * v) / peak), sx, sy, '#aaa', 2);
  for (let r = 1; r <= k; r++) polyline(ctx, xs, row(r), sx, sy, '#cde', 1);
  polyline(ctx, xs, row(k + 1), sx, sy, '#000', 2);
}

function drawIndexSets() {
  const deg = parseInt($('i-deg').value, 10);
  $('i-deg-v').textContent = deg;
  const total = indexSet('total', deg);
  const hyper = indexSet('hyperbolic', deg);
  const c = $('i-canvas'), ctx = c.getContext('2d');
  ctx.clearRect(0, 0, c.width, c.height);
  const cell = (c.width - 20) / (deg + 1);
  const dot = (arr, color, size) => {
    ctx.fillStyle = color;
    for (let j = 0; j < arr.length; j += 2) {
      const x = 10 + arr[j] * cell, y = c.height - 10 - (arr[j + 1] + 1) * cell;
      ctx.fillRect(x + (cell - size) / 2, y + (cell - size) / 2, size, size);
    }
  };
  dot(total, '#cde', Math.max(2, cell * 0.9));
  dot(hyper, '#c33', Math.max(2, cell * 0.5));
  $('i-out').textContent = `total degree: ${total.length / 2} indices (blue); hyperbolic cross: ${hyper.length / 2} (red)`;
}

function runSolve() {
  const q = parseFloat($('s-q').value);
  const k = parseInt($('s-k').value, 10);
  const m = parseInt($('s-m').value, 10);
  const n = parseInt($('s-n').value, 10);
  const seed = parseInt($('s-seed').value, 10);
  const pts = 241;
  let out;
  try {
    out = solveCurve(q, k, m, n, seed, pts);
  } catch (e) {
    $('s-out').textContent = String(e);
    return;
  }
  const xs = out.subarray(2, 2 + pts);
  const est = out.subarray(2 + pts, 2 + 2 * pts);
  const exact = out.subarray(2 + 2 * pts, 2 + 3 * pts);
  const c = $('s-canvas'), ctx = c.getContext('2d');
  frame(ctx, c.width, c.height);
  const sx = (x) => ((x + 6) / 12) * c.width;
  const sy = (y) => c.height - ((y - 0) / 3.2) * c.height;
  polyline(ctx, xs, exact, sx, sy, '#aaa', 4);
  polyline(ctx, xs, est, sx, sy, '#c33', 1.5);
  $('s-out').textContent =
    `u(0, x): exact (grey) vs estimate (red).  MSE_max = ${out[0].toFixed(3)}, MSE_av = ${out[1].toFixed(3)}`;
}

await init();
$('b-mu').addEventListener('input', drawBasis);
$('b-k').addEventListener('input', drawBasis);
$('i-deg').addEventListener('input', drawIndexSets);
$('s-run').addEventListener('click', runSolve);
drawBasis();
drawIndexSets();
runSolve();

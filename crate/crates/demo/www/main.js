import init, { bandit_curve, option_returns, gradient_bound } from "./pkg/mvpg_demo.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

function axes(ctx, w, h, ylabel) {
  ctx.strokeStyle = "#888";
  ctx.beginPath();
  ctx.moveTo(40, 10);
  ctx.lineTo(40, h - 25);
  ctx.lineTo(w - 10, h - 25);
  ctx.stroke();
  ctx.fillStyle = "#444";
  ctx.fillText(ylabel, 4, 12);
}

const banditRuns = [];

function drawBandit() {
  const c = $("b-canvas"), ctx = c.getContext("2d");
  const w = c.width, h = c.height;
  ctx.clearRect(0, 0, w, h);
  axes(ctx, w, h, "π(A)");
  ctx.fillText("1", 28, 14);
  ctx.fillText("0", 28, h - 25);
  ctx.fillText("episode", w - 60, h - 8);
  banditRuns.forEach((run, i) => {
    const color = palette[i % palette.length];
    ctx.strokeStyle = color;
    ctx.beginPath();
    run.curve.forEach((p, k) => {
      const x = 40 + (k / (run.curve.length - 1)) * (w - 50);
      const y = h - 25 - p * (h - 35);
      k === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y);
    });
    ctx.stroke();
    ctx.fillStyle = color;
    ctx.fillText(`λ=${run.lambda} seed ${run.seed}`, w - 140, 20 + 14 * i);
  });
}

function moments(xs) {
  const m = xs.reduce((a, b) => a + b, 0) / xs.length;
  const v = xs.reduce((a, b) => a + (b - m) * (b - m), 0) / xs.length;
  return [m, Math.sqrt(v)];
}

function drawHistograms(series) {
  const c = $("o-canvas"), ctx = c.getContext("2d");
  const w = c.width, h = c.height, bins = 30;
  ctx.clearRect(0, 0, w, h);
  axes(ctx, w, h, "share");
  const hi = Math.max(...series.flatMap((s) => s.values), 1e-9);
  const counts = series.map((s) => {
    const n = new Array(bins).fill(0);
    for (const v of s.values) n[Math.min(bins - 1, Math.floor((v / hi) * bins))] += 1;
    return n.map((k) => k / s.values.length);
  });
  const top = Math.max(...counts.flat());
  const bw = (w - 50) / bins;
  counts.forEach((n, j) => {
    ctx.fillStyle = palette[j] + "99";
    n.forEach((f, b) => {
      const bh = (f / top) * (h - 35);
      ctx.fillRect(40 + b * bw + (j * bw) / 2, h - 25 - bh, bw / 2, bh);
    });
    ctx.fillStyle = palette[j];
    ctx.fillText(series[j].name, w - 140, 20 + 14 * j);
  });
  ctx.fillStyle = "#444";
  ctx.fillText("0", 40, h - 10);
  ctx.fillText(hi.toFixed(2), w - 40, h - 10);
}

function updateBound() {
  try {
    const v = gradient_bound(num("k-l"), num("k-g"), num("k-s"), num("k-a"), num("k-beta"), num("k-n"), num("k-f"));
    $("k-out").textContent = `bound on E‖∇f‖² at the reported iterate: ${v.toPrecision(8)}`;
  } catch (e) {
    $("k-out").textContent = `error: ${e}`;
  }
}

async function main() {
  await init();
  $("b-run").onclick = () => {
    const lambda = num("b-lambda"), seed = num("b-seed");
    try {
      banditRuns.push({ lambda, seed, curve: Array.from(bandit_curve(lambda, num("b-episodes"), seed, 200)) });
    } catch (e) {
      alert(e);
    }
    drawBandit();
  };
  $("b-clear").onclick = () => {
    banditRuns.length = 0;
    drawBandit();
  };
  $("o-run").onclick = () => {
    const lambda = num("o-lambda"), n = num("o-episodes"), seed = num("o-seed");
    $("o-stats").textContent = "training...";
    setTimeout(() => {
      try {
        const series = [
          { name: `λ=${lambda}`, values: Array.from(option_returns(lambda, n, seed, 5000)) },
          { name: "baseline", values: Array.from(option_returns(0, n, seed, 5000)) },
        ];
        drawHistograms(series);
        $("o-stats").textContent = series
          .map((s) => {
            const [m, sd] = moments(s.values);
            return `${s.name.padEnd(10)} mean ${m.toFixed(4)}  std ${sd.toFixed(4)}`;
          })
          .join("\n");
      } catch (e) {
        $("o-stats").textContent = `error: ${e}`;
      }
    }, 10);
  };
  for (const id of ["k-l", "k-g", "k-s", "k-a", "k-beta", "k-n", "k-f"]) $(id).oninput = updateBound;
  updateBound();
  drawBandit();
}

main();

import init, { bmvNegativities, fuzzFinalNegativities, loccDeviations } from "./pkg/mediatrix_wasm.js";

const QUANTUM = "#c0392b";
const CLASSICAL = "#2471a3";
const PAD = 34;

function frame(canvas, yMax, yLabel) {
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.strokeStyle = "#999";
  ctx.beginPath();
  ctx.moveTo(PAD, 8);
  ctx.lineTo(PAD, canvas.height - PAD);
  ctx.lineTo(canvas.width - 8, canvas.height - PAD);
  ctx.stroke();
  ctx.fillStyle = "#555";
  ctx.font = "11px system-ui";
  ctx.fillText(yLabel(yMax), 2, 14);
  ctx.fillText(yLabel(0), 2, canvas.height - PAD);
  return ctx;
}

function drawBmv() {
  const canvas = document.getElementById("bmv");
  const q = bmvNegativities(true);
  const c = bmvNegativities(false);
  const steps = q.length / 3;
  const ctx = frame(canvas, 0.5, (v) => v.toFixed(1));
  const h = canvas.height - PAD - 8;
  const slot = (canvas.width - PAD - 16) / steps;
  for (let s = 0; s < steps; s++) {
    const x = PAD + 8 + s * slot;
    const bar = (v, dx, color) => {
      ctx.fillStyle = color;
      const bh = (Math.max(v, 0) / 0.5) * h;
      ctx.fillRect(x + dx, canvas.height - PAD - bh, slot * 0.3, Math.max(bh, 1));
    };
    bar(q[3 * s], 0, QUANTUM);
    bar(c[3 * s], slot * 0.32, CLASSICAL);
    ctx.fillStyle = "#555";
    ctx.fillText(s === 0 ? "start" : `step ${s}`, x, canvas.height - PAD + 16);
  }
}

function drawFuzz() {
  const seed = Number(document.getElementById("seed").value) >>> 0;
  const count = Math.min(400, Math.max(1, Number(document.getElementById("count").value) | 0));
  const dg = Math.min(4, Math.max(1, Number(document.getElementById("dg").value) | 0));
  const q = Array.from(fuzzFinalNegativities(seed, count, dg, true)).sort((a, b) => a - b);
  const c = Array.from(fuzzFinalNegativities(seed, count, dg, false)).sort((a, b) => a - b);
  const canvas = document.getElementById("fuzz");
  const yMax = Math.max(0.05, ...q);
  const ctx = frame(canvas, yMax, (v) => v.toFixed(2));
  const h = canvas.height - PAD - 8;
  const w = canvas.width - PAD - 16;
  const plot = (vals, color) => {
    ctx.fillStyle = color;
    vals.forEach((v, i) => {
      const x = PAD + 8 + (i / Math.max(1, vals.length - 1)) * w;
      const y = canvas.height - PAD - (Math.max(v, 0) / yMax) * h;
      ctx.fillRect(x - 1.5, y - 1.5, 3, 3);
    });
  };
  plot(q, QUANTUM);
  plot(c, CLASSICAL);
  const entangled = q.filter((v) => v > 1e-9).length;
  document.getElementById("fuzz-summary").textContent =
    `quantum G: ${entangled}/${count} end entangled, max ${Math.max(...q).toExponential(3)}; ` +
    `classical G: max ${Math.max(...c).toExponential(3)}`;
}

function drawLocc() {
  const count = Math.min(200, Math.max(1, Number(document.getElementById("locc-count").value) | 0));
  const d = Array.from(loccDeviations(7, count));
  const canvas = document.getElementById("locc");
  const lo = -18;
  const hi = -6;
  const ctx = frame(canvas, hi, (v) => `1e${v === 0 ? lo : v}`);
  const h = canvas.height - PAD - 8;
  const w = canvas.width - PAD - 16;
  const y = (v) => canvas.height - PAD - ((Math.log10(Math.max(v, 1e-18)) - lo) / (hi - lo)) * h;
  ctx.setLineDash([4, 4]);
  ctx.strokeStyle = QUANTUM;
  ctx.beginPath();
  ctx.moveTo(PAD, y(1e-9));
  ctx.lineTo(canvas.width - 8, y(1e-9));
  ctx.stroke();
  ctx.setLineDash([]);
  ctx.fillStyle = CLASSICAL;
  d.forEach((v, i) => {
    const x = PAD + 8 + (i / Math.max(1, d.length - 1)) * w;
    ctx.fillRect(x - 2, y(v) - 2, 4, 4);
  });
  const worst = Math.max(...d);
  document.getElementById("locc-summary").textContent =
    `${d.filter((v) => v <= 1e-9).length}/${count} within 1e-9, worst ${worst.toExponential(2)}`;
}

await init();
drawBmv();
drawFuzz();
drawLocc();
document.getElementById("fuzz-go").addEventListener("click", drawFuzz);
document.getElementById("locc-go").addEventListener("click", drawLocc);

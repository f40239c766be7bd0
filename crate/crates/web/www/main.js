import init, { gram_magnitudes, recover, tail_curve } from "./pkg/mimo_cs_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function params() {
  return {
    nt: num("nt"), nr: num("nr"), ntime: num("ntime"), s: num("s"),
    eta: $("eta").value.trim(), sigma: num("sigma"), seed: num("seed"), trials: num("trials"),
  };
}

function report(id, text, isError = false) {
  $(id).textContent = text;
  $(id).className = isError ? "status error" : "status";
}

// Grey scale: 0 is white, `max` is black.
function drawMatrix(canvas, values, rows, cols, max) {
  const ctx = canvas.getContext("2d");
  const cw = canvas.width / cols, ch = canvas.height / rows;
  ctx.fillStyle = "#fff";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  for (let r = 0; r < rows; r++) {
    for (let c = 0; c < cols; c++) {
      const v = Math.min(values[r * cols + c] / max, 1);
      const g = Math.round(255 * (1 - v));
      ctx.fillStyle = `rgb(${g},${g},${g})`;
      ctx.fillRect(c * cw, r * ch, Math.ceil(cw), Math.ceil(ch));
    }
  }
}

function runGram() {
  const p = params();
  try {
    const out = gram_magnitudes(p.nt, p.nr, p.ntime, p.s, p.eta, p.seed);
    const s = out[0];
    drawMatrix($("gram"), out.slice(3), s, s, 1);
    report("gram-status", `deviation ${out[1].toFixed(4)}, η = ${out[2].toFixed(3)}`);
  } catch (e) {
    report("gram-status", String(e), true);
  }
}

function runRecover() {
  const p = params();
  try {
    const out = recover(p.nt, p.nr, p.ntime, p.s, p.eta, p.sigma, p.seed);
    const [ok, err, iters, na, nd] = out;
    const n = na * nd;
    const truth = out.slice(5, 5 + n), est = out.slice(5 + n);
    const max = Math.max(...truth);
    // rows = angle bins, columns = delays
    drawMatrix($("truth"), truth, na, nd, max);
    drawMatrix($("estimate"), est, na, nd, max);
    report("recover-status", `${ok ? "recovered" : "failed"}; sup error ${err.toFixed(3)}, ${iters} iterations`);
  } catch (e) {
    report("recover-status", String(e), true);
  }
}

function runTail() {
  const p = params();
  try {
    const out = tail_curve(p.nt, p.nr, p.ntime, p.s, p.eta, p.trials, p.seed);
    const deltas = out.slice(1, 51), surv = out.slice(51);
    const c = $("tail"), ctx = c.getContext("2d");
    const pad = 30, w = c.width - 2 * pad, h = c.height - 2 * pad;
    const lx = (d) => pad + w * (Math.log10(d) + 3) / (Math.log10(2) + 3);
    const ly = (v) => pad + h * (1 - v);
    ctx.clearRect(0, 0, c.width, c.height);
    ctx.strokeStyle = "#999";
    ctx.strokeRect(pad, pad, w, h);
    ctx.fillStyle = "#444";
    ctx.fillText("1e-3", pad - 10, c.height - 10);
    ctx.fillText("2", pad + w - 4, c.height - 10);
    ctx.fillText("1", 8, pad + 4);
    ctx.fillText("0", 8, pad + h);
    ctx.strokeStyle = "#1456a0";
    ctx.beginPath();
    deltas.forEach((d, k) => (k ? ctx.lineTo(lx(d), ly(surv[k])) : ctx.moveTo(lx(d), ly(surv[k]))));
    ctx.stroke();
    report("tail-status", `median deviation ${out[0].toFixed(4)}`);
  } catch (e) {
    report("tail-status", String(e), true);
  }
}

await init();
$("run-gram").onclick = runGram;
$("run-recover").onclick = runRecover;
$("run-tail").onclick = runTail;
runGram();
runRecover();

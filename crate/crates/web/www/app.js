import init, { simulate, certificate_scan, certificate_json, kernel_profile } from "./pkg/rinzelkit_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);
const params = () => $("params").value;

function fail(el, e) {
  el.textContent = String(e.message ?? e);
  el.className = "err";
}

function frame(ctx, w, h) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(40.5, 10.5, w - 50, h - 40);
}

function plot(canvas, xs, series, { logY = false } = {}) {
  const ctx = canvas.getContext("2d");
  const [w, h] = [canvas.width, canvas.height];
  frame(ctx, w, h);
  const tf = (v) => (logY ? Math.log10(Math.max(v, 1e-300)) : v);
  const all = series.flatMap((s) => s.ys.map(tf)).filter(Number.isFinite);
  let [lo, hi] = [Math.min(...all), Math.max(...all)];
  if (hi === lo) [lo, hi] = [lo - 1, hi + 1];
  const [x0, x1] = [xs[0], xs[xs.length - 1]];
  const px = (x) => 40 + ((x - x0) / (x1 - x0)) * (w - 50);
  const py = (y) => 10 + (1 - (tf(y) - lo) / (hi - lo)) * (h - 40);
  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.setLineDash(s.dash ?? []);
    ctx.beginPath();
    s.ys.forEach((y, i) => (i ? ctx.lineTo(px(xs[i]), py(y)) : ctx.moveTo(px(xs[i]), py(y))));
    ctx.stroke();
  }
  ctx.setLineDash([]);
  ctx.fillStyle = "#333";
  ctx.fillText((logY ? "1e" : "") + hi.toPrecision(4), 2, 18);
  ctx.fillText((logY ? "1e" : "") + lo.toPrecision(4), 2, h - 32);
  ctx.fillText(x0.toPrecision(4), 40, h - 14);
  ctx.fillText(x1.toPrecision(4), w - 50, h - 14);
  let lx = 60;
  for (const s of series) {
    ctx.fillStyle = s.color;
    ctx.fillText(s.label, lx, h - 14);
    lx += 12 + ctx.measureText(s.label).width;
  }
}

function runSimulate() {
  const info = $("sim-info");
  info.className = "";
  try {
    const n = 800;
    const rows = simulate(params(), num("u0"), num("w0"), num("y0"), num("T"), n);
    const col = (k) => Array.from({ length: n }, (_, i) => rows[5 * i + k]);
    const ts = col(0);
    const E = col(4);
    const series = [
      { ys: E, color: "#c33", label: "E(t)" },
    ];
    let text = `E(0) = ${E[0].toPrecision(6)}, max E = ${Math.max(...E).toPrecision(6)}`;
    const cert = JSON.parse(certificate_json(params(), num("sim-eps1")));
    if (cert.valid) {
      const env = ts.map((t) => Math.exp(-cert.C * t) * E[0] + (cert.C1 / cert.C) * (1 - Math.exp(-cert.C * t)));
      series.push({ ys: env, color: "#36c", dash: [4, 3], label: "certified envelope" });
      text += `\nC = ${cert.C.toExponential(4)}, C1 = ${cert.C1.toPrecision(6)}, E0 + C1/C = ${(E[0] + cert.C1 / cert.C).toExponential(4)}`;
    } else {
      text += "\nno valid certificate at this eps1";
    }
    plot($("sim"), ts, series, { logY: true });
    info.textContent = text;
  } catch (e) {
    fail(info, e);
  }
}

let scanState = null;

function runScan() {
  const info = $("scan-info");
  info.className = "";
  try {
    const [na, ne] = [180, 52];
    const [aLo, aHi, eHi] = [num("a-lo"), num("a-hi"), num("e-hi")];
    const grid = certificate_scan(params(), aLo, aHi, na, 0, eHi, ne);
    const canvas = $("scan");
    const ctx = canvas.getContext("2d");
    const [w, h] = [canvas.width, canvas.height];
    ctx.clearRect(0, 0, w, h);
    const finite = Array.from(grid).filter(Number.isFinite);
    const [lo, hi] = [Math.min(...finite), Math.max(...finite)];
    const cw = (w - 50) / na, ch = (h - 40) / ne;
    for (let j = 0; j < ne; j++) {
      for (let i = 0; i < na; i++) {
        const v = grid[j * na + i];
        if (Number.isFinite(v)) {
          const s = hi > lo ? (v - lo) / (hi - lo) : 1;
          ctx.fillStyle = `hsl(${240 - 200 * s}, 70%, ${35 + 30 * s}%)`;
        } else {
          ctx.fillStyle = "#ddd";
        }
        ctx.fillRect(40 + i * cw, 10 + (ne - 1 - j) * ch, cw + 0.5, ch + 0.5);
      }
    }
    ctx.fillStyle = "#333";
    ctx.fillText(`a = ${aLo}`, 40, h - 14);
    ctx.fillText(`a = ${aHi}`, w - 70, h - 14);
    ctx.fillText(`eps1 = ${eHi}`, 2, 18);
    ctx.fillText("0", 25, h - 32);
    scanState = { aLo, aHi, eHi, na, ne, cw, ch };
    info.textContent = finite.length
      ? `${finite.length} of ${na * ne} cells certified; log10 C from ${lo.toFixed(2)} to ${hi.toFixed(2)}`
      : "no cell certified";
  } catch (e) {
    fail(info, e);
  }
}

function inspectCell(ev) {
  if (!scanState) return;
  const { aLo, aHi, eHi, na, ne, cw, ch } = scanState;
  const r = ev.target.getBoundingClientRect();
  const i = Math.floor((ev.clientX - r.left - 40) / cw);
  const j = ne - 1 - Math.floor((ev.clientY - r.top - 10) / ch);
  if (i < 0 || i >= na || j < 0 || j >= ne) return;
  const a = aLo + ((aHi - aLo) * i) / (na - 1);
  const eps1 = (eHi * j) / (ne - 1);
  const p = JSON.parse(params());
  p.a = a;
  try {
    const c = JSON.parse(certificate_json(JSON.stringify(p), eps1));
    $("scan-info").className = "";
    $("scan-info").textContent =
      `a = ${a.toFixed(6)}, eps1 = ${eps1.toExponential(3)}: f = ${c.f.toExponential(4)}, g = ${c.g.toExponential(4)}, ` +
      `C = ${c.C.toExponential(4)}, C1 = ${c.C1.toPrecision(6)}, valid = ${c.valid}`;
  } catch (e) {
    fail($("scan-info"), e);
  }
}

function runKernel() {
  const info = $("kernel-info");
  info.className = "";
  const t = num("kt");
  $("kt-val").textContent = t.toFixed(2);
  try {
    const p = JSON.parse(params());
    p.eps = num("keps");
    p.delta = num("kdelta");
    const n = 161;
    const [lo, hi] = [-6, 6];
    const v = kernel_profile(JSON.stringify(p), t, lo, hi, n);
    const xs = Array.from({ length: n }, (_, i) => lo + ((hi - lo) * i) / (n - 1));
    const H = Array.from(v.slice(0, n));
    const heat = Array.from(v.slice(n));
    plot($("kernel"), xs, [
      { ys: H, color: "#c33", label: "H(x, t)" },
      { ys: heat, color: "#36c", dash: [4, 3], label: "heat kernel e^(-at)" },
    ]);
    const dev = Math.max(...H.map((h, i) => Math.abs(h - heat[i])));
    info.textContent = `max |H - heat e^(-at)| = ${dev.toExponential(3)} at t = ${t}`;
  } catch (e) {
    fail(info, e);
  }
}

await init();
$("run-sim").onclick = runSimulate;
$("run-scan").onclick = runScan;
$("scan").onclick = inspectCell;
$("kt").oninput = runKernel;
$("keps").onchange = runKernel;
$("kdelta").onchange = runKernel;
runSimulate();
runScan();
runKernel();

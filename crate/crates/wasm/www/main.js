import init, { check_descriptor, classify_surface, analyze_loop } from "./pkg/elliptic_wasm.js";

const $ = (id) => document.getElementById(id);

function show(out, f) {
  out.classList.remove("error");
  try {
    out.textContent = f();
  } catch (e) {
    out.classList.add("error");
    out.textContent = String(e.message ?? e);
  }
}

function drawLoop(data) {
  const canvas = $("grid");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const pts = data.vertices.concat(data.cells.flatMap(([a, b]) => [[a, b], [a + 1, b + 1]]));
  const xs = pts.map((p) => p[0]), ys = pts.map((p) => p[1]);
  const lo = Math.min(...xs, ...ys) - 1, hi = Math.max(...xs, ...ys) + 1;
  const s = canvas.width / (hi - lo);
  const X = (x) => (x - lo) * s, Y = (y) => canvas.height - (y - lo) * s;
  const top = Math.max(1, ...data.cells.map((c) => Math.abs(c[2])));
  for (const [a, b, c] of data.cells) {
    const t = Math.abs(c) / top;
    ctx.fillStyle = c > 0 ? `rgba(40,90,200,${0.2 + 0.6 * t})` : `rgba(200,60,40,${0.2 + 0.6 * t})`;
    ctx.fillRect(X(a), Y(b + 1), s, s);
  }
  ctx.strokeStyle = "#000";
  ctx.lineWidth = 2;
  ctx.beginPath();
  data.vertices.forEach(([x, y], i) => (i ? ctx.lineTo(X(x), Y(y)) : ctx.moveTo(X(x), Y(y))));
  ctx.stroke();
}

await init();

$("check").onclick = () =>
  show($("check-out"), () => JSON.parse(check_descriptor($("descriptor").value, Number($("budget").value))).text);

$("classify").onclick = () =>
  show($("surface-out"), () => {
    const r = JSON.parse(classify_surface($("family").value, Number($("epsilon").value)));
    const lines = [`${r.profile}`, `Ahlfors: ${r.ahlfors.verdict} (window trace: ${r.ahlfors.numerical})`];
    if (r.milnor) lines.push(`Milnor: ${r.milnor.verdict}`);
    lines.push("", "log r start   log r end   ∫ dr/L");
    for (const w of r.ahlfors.windows) {
      lines.push(`${w.log_r_start.toFixed(2).padStart(11)} ${w.log_r_end.toFixed(2).padStart(11)}   ${w.integral.toExponential(4)}`);
    }
    return lines.join("\n");
  });

$("loop").onclick = () =>
  show($("loop-out"), () => {
    const r = JSON.parse(analyze_loop($("word").value));
    drawLoop(r);
    return [
      `reduced: ${r.reduced || "(trivial)"}`,
      `turning number: ${r.turning_number ?? "undefined for a trivial loop"}`,
      `edge mass: ${r.mass}, filled cells: ${r.cells.length}`,
    ].join("\n");
  });

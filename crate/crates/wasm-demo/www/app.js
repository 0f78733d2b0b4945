import init, { expansion_view, optimal_region, nash } from "./pkg/advrisk_demo.js";

const $ = (id) => document.getElementById(id);
const canvas = $("board");
const ctx = canvas.getContext("2d");
const out = $("out");

const state = {
  width: 8,
  height: 6,
  w0: [],
  w1: [],
  region: new Set(),
  expanded: new Set(),
  witness: new Set(),
  stars: null,
};

function reset() {
  state.width = clamp(+$("width").value, 1, 12);
  state.height = clamp(+$("height").value, 1, 12);
  const n = state.width * state.height;
  state.w0 = new Array(n).fill(0);
  state.w1 = new Array(n).fill(0);
  state.region.clear();
  state.w0[0] = 1;
  state.w1[n - 1] = 1;
  clearResults();
}

function clearResults() {
  state.witness.clear();
  state.stars = null;
}

const clamp = (v, lo, hi) => Math.max(lo, Math.min(hi, v || lo));
const epsilon = () => `${+$("eps").value}/2`;
const board = () => ({ width: state.width, height: state.height, norm: $("norm").value, epsilon: epsilon() });

function gameRequest() {
  return {
    board: board(),
    weights0: state.w0,
    weights1: state.w1,
    T: $("t").value.trim() || "1",
    region: [...state.region],
  };
}

function call(fn, request) {
  try {
    return JSON.parse(fn(JSON.stringify(request)));
  } catch (e) {
    out.innerHTML = "";
    const span = document.createElement("span");
    span.className = "error";
    span.textContent = String(e);
    out.append(span);
    return null;
  }
}

const cell = () => Math.floor(Math.min(canvas.width / state.width, canvas.height / state.height));

function draw() {
  const s = cell();
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.font = `${Math.max(9, s / 4)}px system-ui`;
  ctx.textBaseline = "top";
  for (let i = 0; i < state.w0.length; i++) {
    const x = (i % state.width) * s;
    const y = Math.floor(i / state.width) * s;
    ctx.fillStyle = state.region.has(i) ? "#7fb2ff" : state.expanded.has(i) ? "#cfe3ff" : "#fff";
    ctx.fillRect(x, y, s, s);
    ctx.strokeStyle = "#bbb";
    ctx.lineWidth = 1;
    ctx.strokeRect(x + 0.5, y + 0.5, s - 1, s - 1);
    if (state.witness.has(i)) {
      ctx.strokeStyle = "#2a8";
      ctx.lineWidth = 3;
      ctx.strokeRect(x + 2.5, y + 2.5, s - 5, s - 5);
    }
    if (state.w0[i]) label(`${state.w0[i]}`, x + 4, y + 4, "#1450a0");
    if (state.w1[i]) label(`${state.w1[i]}`, x + s - 4, y + s - 4, "#b22", true);
    if (state.stars) {
      dot(x + s * 0.35, y + s / 2, state.stars.p0[i], "rgba(20,80,160,.7)", s);
      dot(x + s * 0.65, y + s / 2, state.stars.p1[i], "rgba(180,30,30,.7)", s);
    }
  }
}

function label(text, x, y, color, corner = false) {
  ctx.fillStyle = color;
  ctx.textAlign = corner ? "right" : "left";
  ctx.textBaseline = corner ? "bottom" : "top";
  ctx.fillText(text, x, y);
}

function dot(x, y, mass, color, s) {
  if (!mass) return;
  ctx.fillStyle = color;
  ctx.beginPath();
  ctx.arc(x, y, Math.max(2, (s / 3) * Math.sqrt(mass)), 0, 2 * Math.PI);
  ctx.fill();
}

function refreshExpansion() {
  $("eps-out").textContent = (+$("eps").value / 2).toString();
  const v = call(expansion_view, { board: board(), region: [...state.region] });
  if (!v) return;
  state.expanded = new Set(v.expanded);
  const lines = [
    `region: ${state.region.size} cells, ε-expansion: ${v.expanded.length}, ε-contraction: ${v.contracted.length}`,
    v.midpoint_complete
      ? "ε-midpoint-complete: yes"
      : `ε-midpoint-complete: no (cells ${v.midpoint_witness.join(" and ")} have no common ε-neighbour)`,
  ];
  out.textContent = lines.join("\n");
  draw();
}

function showOptimal() {
  const v = call(optimal_region, gameRequest());
  if (!v) return;
  state.witness = new Set(v.witness);
  state.stars = null;
  const lines = [
    `optimal adversarial risk: ${v.value.exact} ≈ ${v.value.approx.toFixed(4)}`,
    `risk without adversary (Bayes): ${v.bayes.exact} ≈ ${v.bayes.approx.toFixed(4)}`,
    `optimal region (green): ${v.witness.length} cells, its adversarial risk ${v.witness_risk.exact}`,
    `method: ${v.mode_used}; midpoint-complete: ${v.midpoint_complete}; witness certified: ${v.witness_certified}`,
  ];
  if (v.mode_used === "formula" && !v.midpoint_complete) {
    lines.push("without ε-midpoints the transport value is an upper bound; the true optimum may be lower");
  }
  if (v.region) {
    lines.push(`painted region: standard risk ${v.region.standard.exact}, adversarial risk ${v.region.adversarial.exact}`);
  }
  out.textContent = lines.join("\n");
  draw();
}

function showNash() {
  const v = call(nash, gameRequest());
  if (!v) return;
  state.witness = new Set(v.a_star);
  state.stars = { p0: v.p0_star, p1: v.p1_star };
  out.textContent = [
    `sup-inf value: ${v.value_supinf.exact}   inf-sup value: ${v.value_infsup.exact}`,
    `δ achieved: ${v.delta.exact}${v.midpoint_complete ? "" : " (space not ε-midpoint-complete)"}`,
    "dots: perturbed class 0 (blue) and class 1 (red) distributions",
    `classifier response (green): ${v.a_star.length} cells`,
  ].join("\n");
  draw();
}

function paint(event) {
  const rect = canvas.getBoundingClientRect();
  const s = cell();
  const cx = Math.floor((event.clientX - rect.left) / s);
  const cy = Math.floor((event.clientY - rect.top) / s);
  if (cx < 0 || cy < 0 || cx >= state.width || cy >= state.height) return;
  const i = cy * state.width + cx;
  const brush = document.querySelector("input[name=brush]:checked").value;
  if (brush === "p0") state.w0[i] += 1;
  if (brush === "p1") state.w1[i] += 1;
  if (brush === "region") state.region.has(i) ? state.region.delete(i) : state.region.add(i);
  if (brush === "erase") {
    state.w0[i] = 0;
    state.w1[i] = 0;
    state.region.delete(i);
  }
  clearResults();
  refreshExpansion();
}

await init();
reset();
canvas.addEventListener("pointerdown", paint);
for (const id of ["width", "height"]) $(id).addEventListener("change", () => { reset(); refreshExpansion(); });
for (const id of ["norm", "eps", "t"]) $(id).addEventListener("input", () => { clearResults(); refreshExpansion(); });
$("clear").addEventListener("click", () => { reset(); refreshExpansion(); });
$("optimal").addEventListener("click", showOptimal);
$("nash").addEventListener("click", showNash);
refreshExpansion();

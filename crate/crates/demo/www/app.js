import init, { hitlExplore, xorCounterfactual, qwkMatrix } from "./pkg/blamescope_demo.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const fmt = (x) => (typeof x === "number" ? x.toFixed(4) : String(x));

function call(f, ...args) {
  try {
    return { ok: JSON.parse(f(...args)) };
  } catch (e) {
    return { err: String(e) };
  }
}

function drawCurve(curve, l) {
  const c = $("h-curve");
  const g = c.getContext("2d");
  g.clearRect(0, 0, c.width, c.height);
  const pad = 24;
  const w = c.width - 2 * pad;
  const h = c.height - 2 * pad;
  const ys = curve.map((p) => p.blame.db);
  const top = Math.max(0.01, ...ys);
  const x = (v) => pad + v * w;
  const y = (v) => pad + h - (v / top) * h;
  g.strokeStyle = "#999";
  g.strokeRect(pad, pad, w, h);
  g.fillStyle = "#555";
  g.fillText(top.toFixed(3), 2, pad + 4);
  g.fillText("0", 2, pad + h);
  g.beginPath();
  curve.forEach((p, i) => (i ? g.lineTo(x(p.l), y(p.blame.db)) : g.moveTo(x(p.l), y(p.blame.db))));
  g.strokeStyle = "#1f6fb2";
  g.lineWidth = 2;
  g.stroke();
  g.strokeStyle = "#c33";
  g.lineWidth = 1;
  g.beginPath();
  g.moveTo(x(l), pad);
  g.lineTo(x(l), pad + h);
  g.stroke();
}

function updateHitl() {
  const l = num("h-l");
  const u = num("h-u");
  $("h-l-v").textContent = l.toFixed(2);
  $("h-u-v").textContent = u.toFixed(2);
  const r = call(hitlExplore, num("h-seed"), num("h-n"), num("h-ai"), num("h-human"), $("h-profile").value, l, u, num("h-cost"));
  $("h-err").textContent = r.err || "";
  if (r.err) return;
  const { blame: b, summary: s } = r.ok.current;
  const rows = [
    ["flagged", `${b.n_flagged} / ${b.n_cases}`],
    ["error rate HITL / human-only", `${fmt(b.p_a)} / ${fmt(b.p_aprime)}`],
    ["delta", fmt(b.delta)],
    ["gamma (cost ratio)", fmt(b.gamma)],
    ["discounted blame", fmt(b.db)],
    ["avoidable / inevitable flagged / inevitable unflagged", `${s.avoidable} / ${s.inevitable_flagged} / ${s.inevitable_unflagged}`],
    ["errors charged to human / AI / flag designer", `${s.party_counts.human} / ${s.party_counts.ai} / ${s.party_counts.flag_designer}`],
  ];
  $("h-table").innerHTML = rows.map(([k, v]) => `<tr><td>${k}</td><td><output>${v}</output></td></tr>`).join("");
  drawCurve(r.ok.curve, l);
}

function updateXor() {
  const r = call(xorCounterfactual, num("x-p1"), num("x-p2"), $("x-ox").value, $("x-oy").value, $("x-do").value);
  if (r.err) {
    $("x-out").textContent = r.err;
    return;
  }
  const post = r.ok.posterior.map((p) => `  E1=${p.noise.E1} E2=${p.noise.E2}  ${fmt(p.prob)}`).join("\n");
  $("x-out").textContent =
    `P(Y=1) factual:        ${fmt(r.ok.factual)}\n` +
    `P(Y=1) counterfactual: ${fmt(r.ok.counterfactual)}\n` +
    `noise posterior:\n${post}`;
}

function updateQwk() {
  const r = call(qwkMatrix, $("q-in").value);
  $("q-out").textContent = r.err
    ? r.err
    : `k = ${r.ok.k}\nkappa = ${fmt(r.ok.kappa)}\nblame = ${fmt(r.ok.blame)}`;
}

await init();
for (const id of ["h-seed", "h-n", "h-ai", "h-human", "h-profile", "h-cost", "h-l", "h-u"]) $(id).addEventListener("input", updateHitl);
for (const id of ["x-p1", "x-p2", "x-ox", "x-oy", "x-do"]) $(id).addEventListener("input", updateXor);
$("q-in").addEventListener("input", updateQwk);
updateHitl();
updateXor();
updateQwk();

import init, { clean, label, near_duplicates } from "./pkg/trxcat_web.js";

const $ = (id) => document.getElementById(id);

function el(tag, text, className) {
  const node = document.createElement(tag);
  if (text !== undefined) node.textContent = text;
  if (className) node.className = className;
  return node;
}

function renderClean() {
  const { tokens } = JSON.parse(clean($("clean-in").value));
  const out = $("clean-out");
  out.replaceChildren(...tokens.map((t) => el("span", t, t.startsWith("<") ? "tag" : "")));
  if (tokens.length === 0) out.replaceChildren(el("em", "(nothing left)"));
}

function renderLabel() {
  const sign = Number(document.querySelector("input[name=sign]:checked").value);
  const value = sign * Math.abs(Number($("label-value").value) || 0);
  const { category, value: shown } = JSON.parse(label($("label-in").value, value));
  $("label-out").textContent = `${category ?? "unlabeled"} (${shown})`;
}

function renderDuplicates() {
  const threshold = Number($("dup-threshold").value);
  $("dup-threshold-value").textContent = threshold.toFixed(2);
  const lines = $("dup-in").value.split("\n").map((l) => l.trim()).filter((l) => l.length > 0);
  let result;
  try {
    result = JSON.parse(near_duplicates($("dup-in").value, threshold));
  } catch (e) {
    $("dup-lines").replaceChildren(el("tr", String(e)));
    return;
  }
  const droppedBy = new Map(result.dropped.map(([d, k]) => [d, k]));
  const header = el("tr");
  header.append(el("th", "#"), el("th", "line"), el("th", "tokens"), el("th", "dedup"));
  $("dup-lines").replaceChildren(
    header,
    ...lines.map((line, i) => {
      const row = el("tr", undefined, droppedBy.has(i) ? "dropped" : "");
      const verdict = droppedBy.has(i) ? `dropped, duplicate of #${droppedBy.get(i)}` : "kept";
      row.append(el("td", String(i)), el("td", line), el("td", result.tokens[i].join(" ")), el("td", verdict));
      return row;
    }),
  );
  const pairHeader = el("tr");
  pairHeader.append(el("th", "pair"), el("th", "cosine"));
  $("dup-pairs").replaceChildren(
    pairHeader,
    ...result.pairs.map((p) => {
      const row = el("tr");
      row.append(el("td", `#${p.i} ~ #${p.j}`), el("td", p.cosine.toFixed(4)));
      return row;
    }),
  );
}

await init();
$("status").textContent = "";
$("clean-in").addEventListener("input", renderClean);
for (const id of ["label-in", "label-value"]) $(id).addEventListener("input", renderLabel);
document.querySelectorAll("input[name=sign]").forEach((r) => r.addEventListener("change", renderLabel));
$("dup-in").addEventListener("input", renderDuplicates);
$("dup-threshold").addEventListener("input", renderDuplicates);
renderClean();
renderLabel();
renderDuplicates();

import init, { pd_sticks, process_draw, weak_limit_curve } from "./pkg/levylab_wasm_demo.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function clear(canvas) {
  const g = canvas.getContext("2d");
  g.clearRect(0, 0, canvas.width, canvas.height);
  return g;
}

function guard(infoId, fn) {
  try {
    fn();
  } catch (e) {
    $(infoId).innerHTML = `<span class="err">${e.message ?? e}</span>`;
  }
}

function drawSticks() {
  guard("pd-info", () => {
    const w = pd_sticks(num("pd-alpha"), num("pd-theta"), num("pd-n"), BigInt(num("pd-seed")));
    const c = $("pd-canvas");
    const g = clear(c);
    const bw = c.width / w.length;
    const top = Math.max(...w);
    g.fillStyle = "#4a7bb7";
    w.forEach((v, i) => {
      const h = (v / top) * (c.height - 10);
      g.fillRect(i * bw + 1, c.height - h, Math.max(bw - 2, 1), h);
    });
    const sum = w.reduce((s, v) => s + v, 0);
    $("pd-info").textContent = `largest stick ${top.toFixed(4)}, mass shown ${sum.toFixed(4)}`;
  });
}

function drawProcess() {
  guard("pr-info", () => {
    const v = process_draw($("pr-model").value, num("pr-theta"), num("pr-alpha"), 2048, BigInt(num("pr-seed")));
    const c = $("pr-canvas");
    const g = clear(c);
    let total = 0;
    for (let i = 1; i < v.length; i += 2) total += v[i];
    // cumulative path t -> η([0, t])
    g.strokeStyle = "#b5523b";
    g.beginPath();
    g.moveTo(0, c.height);
    let run = 0;
    for (let i = 0; i < v.length; i += 2) {
      const x = v[i] * c.width;
      g.lineTo(x, c.height - (run / total) * (c.height - 10));
      run += v[i + 1];
      g.lineTo(x, c.height - (run / total) * (c.height - 10));
    }
    g.lineTo(c.width, c.height - (run / total) * (c.height - 10));
    g.stroke();
    $("pr-info").textContent = `${v.length / 2} atoms, total charge ${total.toFixed(5)}`;
  });
}

function weakLimit() {
  const t = $("wl-table");
  try {
    const alphas = new Float64Array([0.8, 0.6, 0.4, 0.2, 0.1, 0.05]);
    const rows = weak_limit_curve(num("wl-theta"), num("wl-k"), num("wl-a"), alphas, num("wl-n"), 7n);
    let html = "<tr><th>α</th><th>analytic</th><th>Monte Carlo</th><th>SE</th><th>gamma limit</th></tr>";
    for (let i = 0; i < rows.length; i += 5) {
      const f = (x, d) => (Number.isNaN(x) ? "-" : x.toFixed(d));
      html += `<tr><td>${rows[i]}</td><td>${f(rows[i + 1], 6)}</td><td>${f(rows[i + 2], 6)}</td>` +
        `<td>${f(rows[i + 3], 6)}</td><td>${f(rows[i + 4], 6)}</td></tr>`;
    }
    t.innerHTML = html;
  } catch (e) {
    t.innerHTML = `<tr><td class="err">${e.message ?? e}</td></tr>`;
  }
}

await init();
$("pd-go").onclick = drawSticks;
$("pr-go").onclick = drawProcess;
$("wl-go").onclick = weakLimit;
drawSticks();
drawProcess();
weakLimit();

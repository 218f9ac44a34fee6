use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    Entropy,
    Figure,
}

const READER: &str = r##"import csv
import sys
from collections import defaultdict

import matplotlib.pyplot as plt

with open(CSV_PATH, newline="") as fh:
    rows = list(csv.DictReader(line for line in fh if not line.startswith("#")))
"##;

const ENTROPY: &str = r##"
tau = [float(r["tau"]) for r in rows]
fig, ax = plt.subplots()
ax.plot(tau, [float(r["s_l_closed"]) for r in rows], label="closed form")
ax.plot(tau, [float(r["s_l_gram"]) for r in rows], "--", label="Gram matrix")
ax.set_xlabel(r"$\tau = \Omega t$")
ax.set_ylabel(r"$S_L$")
ax.legend()
"##;

const FIGURE: &str = r##"
fig, axes = plt.subplots(1, 3, figsize=(15, 4.5))
grid = [r for r in rows if r["panel"] == "a"]
ns = sorted({int(r["n_nodes"]) for r in grid})
xs = sorted({int(r["n_exc"]) for r in grid})
values = {(int(r["n_nodes"]), int(r["n_exc"])): float(r["value"]) for r in grid}
mesh = axes[0].pcolormesh(xs, ns, [[values[(n, x)] for x in xs] for n in ns], norm="log", shading="nearest")
fig.colorbar(mesh, ax=axes[0])
axes[0].set_xlabel(r"$N_\mathrm{exc}$")
axes[0].set_ylabel(r"$N$")

for ax, panel, key in ((axes[1], "b", "n_nodes"), (axes[2], "c", "n_exc")):
    series = defaultdict(list)
    for r in rows:
        if r["panel"] == panel:
            series[r["platform"]].append((int(r[key]), float(r["value"])))
    for name, pts in series.items():
        ax.loglog(*zip(*sorted(pts)), marker="o", ms=3, label=name)
    ax.set_xlabel(r"$N$" if key == "n_nodes" else r"$N_\mathrm{exc}$")
    ax.set_ylabel("summed variance [" + rows[-1]["unit"] + "]")
    ax.legend()
"##;

const FOOTER: &str = r##"
fig.tight_layout()
if len(sys.argv) > 1:
    fig.savefig(sys.argv[1])
else:
    plt.show()
"##;

/// Python script that plots the CSV at `csv`; pass an image path to save
/// instead of showing a window.
pub fn script(kind: PlotKind, csv: &Path) -> String {
    let body = match kind {
        PlotKind::Entropy => ENTROPY,
        PlotKind::Figure => FIGURE,
    };
    let path = csv.canonicalize().unwrap_or_else(|_| csv.to_path_buf());
    format!("CSV_PATH = {:?}\n{READER}{body}{FOOTER}", path.display().to_string())
}

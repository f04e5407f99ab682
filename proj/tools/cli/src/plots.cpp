#include "qbm_cli/plots.hpp"

#include <fmt/format.h>

namespace qbm::cli {

std::string trajectory_plot_script(bool single, std::size_t runs) {
    const std::string files = single ? "['trajectory.csv']"
                                     : fmt::format("[f'trajectory_{{k}}.csv' for k in range({})]", runs);
    return fmt::format(R"(import csv, sys
import matplotlib.pyplot as plt

files = {}
fig, ax = plt.subplots()
for name in files:
    with open(name) as fh:
        rows = list(csv.DictReader(fh))
    ax.plot([float(r['t']) for r in rows], [float(r['EN']) for r in rows], label=name)
ax.set_xlabel('t')
ax.set_ylabel('E_N')
if len(files) > 1:
    ax.legend(fontsize='small')
fig.savefig(sys.argv[1] if len(sys.argv) > 1 else 'trajectory.png', dpi=150)
)",
                       files);
}

std::string coefficients_plot_script() {
    return R"(import csv, sys
import matplotlib.pyplot as plt

with open('coefficients.csv') as fh:
    rows = [r for r in csv.DictReader(line for line in fh if not line.startswith('#'))]
t = [float(r['t']) for r in rows]
fig, axes = plt.subplots(3, 1, sharex=True)
for ax, key in zip(axes, ['gamma', 'delta_omega2', 'diffusion']):
    ax.plot(t, [float(r[key]) for r in rows])
    ax.set_ylabel(key)
axes[-1].set_xlabel('t')
fig.savefig(sys.argv[1] if len(sys.argv) > 1 else 'coefficients.png', dpi=150)
)";
}

std::string phase_diagram_plot_script() {
    return R"(import csv, json, sys
import matplotlib.pyplot as plt

colors = {'NSD': 'tab:green', 'SDR': 'tab:orange', 'SD': 'tab:gray'}
with open('phase_diagram.csv') as fh:
    rows = [r for r in csv.DictReader(fh) if r['status'] == 'ok']
with open('boundaries.json') as fh:
    bounds = json.load(fh)
slices = sorted({(r['C12'], r['purity']) for r in rows})
fig, axes = plt.subplots(1, len(slices), squeeze=False, figsize=(5 * len(slices), 4))
for ax, (c12, purity) in zip(axes[0], slices):
    sel = [r for r in rows if (r['C12'], r['purity']) == (c12, purity)]
    ax.scatter([float(r['T']) for r in sel], [float(r['r']) for r in sel],
               c=[colors[r['phase']] for r in sel], s=12)
    for s in bounds['slices']:
        if abs(s['c12'] - float(c12)) < 1e-12 and abs(s['purity'] - float(purity)) < 1e-12:
            for key, style in (('nsd_boundary', 'k-'), ('sd_boundary', 'k--')):
                for line in s[key]:
                    ax.plot([p[0] for p in line], [p[1] for p in line], style)
    ax.set_title(f'C12={c12}, dx-dp-={purity}')
    ax.set_xlabel('T')
    ax.set_ylabel('r')
fig.tight_layout()
fig.savefig(sys.argv[1] if len(sys.argv) > 1 else 'phase_diagram.png', dpi=150)
)";
}

}  // namespace qbm::cli

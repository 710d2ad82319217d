"""A small field batch through the command-line entry point.

Renders four leaves with known damage plus one corrupt file, analyzes the
folder and compares each report with the truth.
"""
import json
from pathlib import Path

from leafsev.cli import main
from leafsev.imaging import save_image
from leafsev.synth import SynthSpec, generate

src = Path("demo-out/batch/in")
out = Path("demo-out/batch/out")
src.mkdir(parents=True, exist_ok=True)

truth = {}
for p in (0.05, 0.10, 0.25, 0.50):
    leaf = generate(SynthSpec(damage_fraction=p, seed=42))
    save_image(src / f"leaf-{p:g}.png", leaf.image)
    truth[f"leaf-{p:g}"] = 100 * leaf.damage_fraction
(src / "scratched.png").write_bytes(b"not an image")

code = main(["analyze", str(src), "--out", str(out), "--parallel", "2"])
print("exit code", code)
for report in sorted(out.glob("*.report.json")):
    r = json.loads(report.read_text())
    stem = report.name.removesuffix(".report.json")
    if r["status"] == "ok":
        print(f"{stem:>12}: {r['severity_percent']:6.2f}%  truth {truth[stem]:6.2f}%")
    else:
        print(f"{stem:>12}: {r['status']}")

s = json.loads((out / "summary.json").read_text())
print(f"mean {s['severity_mean']} +/- {s['severity_std']} over {s['count_ok']} leaves")

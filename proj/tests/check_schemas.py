"""Validates data/ fixtures and a fresh solve manifest against schemas/."""
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema
from referencing import Registry, Resource

qsum, root = sys.argv[1], pathlib.Path(sys.argv[2])
schemas = {p.name: json.loads(p.read_text()) for p in (root / "schemas").glob("*.schema.json")}
registry = Registry().with_resources(
    [(name, Resource.from_contents(s)) for name, s in schemas.items()]
    + [(s["$id"], Resource.from_contents(s)) for s in schemas.values()]
)


def check(schema, path):
    doc = json.loads(pathlib.Path(path).read_text())
    jsonschema.Draft7Validator(schemas[schema], registry=registry).validate(doc)
    print("ok  ", schema, path)


for name in ["basic", "contraction", "gap_violation", "bad_shift", "bad_degree"]:
    check("problem.schema.json", root / "data" / f"{name}.json")
check("series.schema.json", root / "data" / "separable_omega.json")

with tempfile.TemporaryDirectory() as out:
    subprocess.run([qsum, "--timestamp", "solve", str(root / "data" / "contraction.json"), "--out", out], check=True)
    check("manifest.schema.json", f"{out}/manifest.json")
    check("series.schema.json", f"{out}/omega.json")
    check("series.schema.json", f"{out}/U_hat.json")
    subprocess.run([qsum, "sum", str(root / "data" / "basic.json"), "--points", str(root / "data" / "points.csv"),
                    "--omega", str(root / "data" / "separable_omega.json"), "--out", out + "/sum"], check=True)
    check("manifest.schema.json", f"{out}/sum/manifest.json")

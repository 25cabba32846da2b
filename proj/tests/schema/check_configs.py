"""Validate the bundled configs against docs/schema.json and check a few rejections."""
import json
import pathlib
import sys

import jsonschema

root = pathlib.Path(sys.argv[1])
schema = json.loads((root / "docs" / "schema.json").read_text())
jsonschema.Draft202012Validator.check_schema(schema)
experiment = jsonschema.Draft202012Validator(schema)
potential = jsonschema.Draft202012Validator({"$defs": schema["$defs"], "$ref": "#/$defs/potential"})

failures = 0
for path in sorted((root / "tools" / "configs").glob("*.json")):
    doc = json.loads(path.read_text())
    validator = experiment if "run" in doc else potential
    errors = list(validator.iter_errors(doc))
    for e in errors:
        print(f"{path.name}: {e.json_path}: {e.message}")
    failures += bool(errors)
    print(f"{'ok  ' if not errors else 'FAIL'} {path.name}")

base = {"name": "x", "run": "minimize"}
bad = [
    {**base, "n": 2},
    {**base, "unknown": 1},
    {**base, "run": "anneal"},
    {**base, "solver": {"bulk": {"potential": {"family": "log", "s": 1}}}},
    {**base, "boundary": {"kind": "constant_tensor"}},
    {**base, "sweep": {"axis": "q", "values": [1]}},
]
for doc in bad:
    if experiment.is_valid(doc):
        print(f"FAIL accepted invalid config {json.dumps(doc)}")
        failures += 1
sys.exit(1 if failures else 0)

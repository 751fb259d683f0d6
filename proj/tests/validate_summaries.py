"""Validates every summary.json under the given directories against the schema."""
import json
import pathlib
import sys

import jsonschema


def main(argv):
    schema = json.loads(pathlib.Path(argv[1]).read_text())
    validator = jsonschema.Draft202012Validator(schema)
    files = [p for d in argv[2:] for p in sorted(pathlib.Path(d).rglob("summary.json"))]
    if not files:
        print("no summary.json found", file=sys.stderr)
        return 1
    bad = 0
    for f in files:
        errors = list(validator.iter_errors(json.loads(f.read_text())))
        for e in errors:
            print(f"{f}: {e.json_path}: {e.message}", file=sys.stderr)
        bad += bool(errors)
    print(f"{len(files) - bad}/{len(files)} summaries valid")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))

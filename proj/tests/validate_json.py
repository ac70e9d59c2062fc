"""Runs the CLI and validates its JSON output against schemas/.

usage: validate_json.py <gandalf-binary> <corpus-dir> <schema-dir> <work-dir>
"""

import json
import pathlib
import subprocess
import sys

import jsonschema
from referencing import Registry, Resource


def load_registry(schema_dir):
    schemas = {}
    for path in sorted(pathlib.Path(schema_dir).glob("*.schema.json")):
        doc = json.loads(path.read_text())
        jsonschema.Draft202012Validator.check_schema(doc)
        schemas[doc["$id"]] = doc
    registry = Registry().with_resources((sid, Resource.from_contents(doc)) for sid, doc in schemas.items())
    return schemas, registry


def run(cmd, ok_codes=(0,)):
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode not in ok_codes:
        sys.exit(f"{' '.join(cmd)} exited {proc.returncode}\n{proc.stderr}")
    return proc.stdout


def main():
    gandalf, corpus, schema_dir, work = sys.argv[1:5]
    work = pathlib.Path(work)
    work.mkdir(parents=True, exist_ok=True)
    schemas, registry = load_registry(schema_dir)

    def validate(doc, schema_id, what):
        validator = jsonschema.Draft202012Validator(schemas[schema_id], registry=registry)
        errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.path))
        if errors:
            for e in errors[:5]:
                print(f"{what}: {'/'.join(map(str, e.path))}: {e.message}")
            sys.exit(1)
        print(f"ok {what}")

    report = work / "report.json"
    run([gandalf, "corpus", corpus, "--json", str(report)])
    validate(json.loads(report.read_text()), "urn:gandalf:run-report", "corpus --json")

    bench = work / "bench.json"
    run([gandalf, "bench", corpus, "--sweep", "--json", str(bench)])
    validate(json.loads(bench.read_text()), "urn:gandalf:bench-report", "bench --json")

    for mode in ([], ["--gandalf"]):
        for src in sorted(pathlib.Path(corpus).rglob("*.mg")):
            out = run([gandalf, "compile", str(src), *mode, "--dump-layout"])
            validate(json.loads(out), "urn:gandalf:frame-layout", f"layout {src.stem} {mode}")
            img = work / (src.stem + ".img")
            run([gandalf, "compile", str(src), *mode, "-o", str(img)])
            out = run([gandalf, "run", str(img), "--json"], ok_codes=(0, 1))
            validate(json.loads(out), "urn:gandalf:run-outcome", f"run {src.stem} {mode}")


if __name__ == "__main__":
    main()

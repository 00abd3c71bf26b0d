#!/usr/bin/env python3
"""Validates files written by `splatedit make-demo` against docs/schemas."""
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema


def load(path):
    return json.loads(pathlib.Path(path).read_text())


def main():
    cli, schema_dir = sys.argv[1], pathlib.Path(sys.argv[2])
    bbox_schema = load(schema_dir / "bbox.schema.json")
    camera_schema = load(schema_dir / "camera_set.schema.json")
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run([cli, "make-demo", "-o", tmp, "--size", "32"], check=True, stdout=subprocess.DEVNULL)
        bbox = load(pathlib.Path(tmp) / "bbox.json")
        jsonschema.validate(bbox, bbox_schema)
        jsonschema.validate(load(pathlib.Path(tmp) / "cameras.json"), camera_schema)

        # The CLI and the schema must agree on rejecting unknown box keys.
        bad = dict(bbox, scale=2.0)
        try:
            jsonschema.validate(bad, bbox_schema)
        except jsonschema.ValidationError:
            pass
        else:
            raise SystemExit("schema accepted an unknown bbox key")
        bad_path = pathlib.Path(tmp) / "bad_bbox.json"
        bad_path.write_text(json.dumps(bad))
        config = load(pathlib.Path(tmp) / "config.json")
        config["bbox"] = str(bad_path)
        (pathlib.Path(tmp) / "bad.json").write_text(json.dumps(config))
        run = subprocess.run([cli, "extract", "-c", str(pathlib.Path(tmp) / "bad.json")], capture_output=True)
        if run.returncode != 2:
            raise SystemExit(f"extract with an unknown bbox key exited {run.returncode}, expected 2")
    print("schemas ok")


if __name__ == "__main__":
    main()

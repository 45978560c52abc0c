"""Write data/reference_schema.json from the device catalog.

The schema lists, per device type, the telemetry fields a reference dataset
would carry for it plus the state field of state-change records. Tags are the
field's word tokens with units spelled out, so name/tag similarity is not a
plain string match.
"""
import json
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent
UNITS = {
    "c": "celsius", "pct": "percent", "w": "watts", "kwh": "kilowatt hours",
    "dbm": "signal strength", "bpm": "beats per minute", "mbps": "megabits per second",
    "kbps": "kilobits per second", "m2": "square meters", "s": "seconds", "lux": "illuminance",
}


def tags_for(name):
    words = name.split("_")
    tags = [w for w in words if w not in UNITS]
    for w in words:
        if w in UNITS:
            tags.extend(UNITS[w].split())
    return sorted(set(tags))


def main():
    catalog = json.loads((ROOT / "data/catalog/devices.json").read_text())
    devices = {}
    for d in catalog["devices"]:
        fields = [
            {"name": t["name"], "type": t["type"], "range": [t["min"], t["max"]], "tags": tags_for(t["name"])}
            for t in d.get("telemetry", [])
        ]
        if len(d.get("states", [])) > 1:
            fields.append({"name": "state", "type": "string", "tags": ["state", "status", "mode"]})
        devices[d["type_name"]] = {"category": d["category"], "fields": fields}
    out = {"schema_version": "1", "source": "device catalog schema " + str(catalog["schema_version"]), "devices": devices}
    (ROOT / "data/reference_schema.json").write_text(json.dumps(out, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
# Copyright 2026 The ontosql Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Convert Schema-Guided Dialogue (SGD) data into the generic schemas.

Dialogues: every dialogues_*.json in the split directory (lists of
{"dialogue_id", "turns": [{"speaker", "utterance", ...}]}) becomes one JSON
array of {"id", "turns": [{"speaker", "text"}]}.

Gold ontology (optional): schema.json gives services as domains, slots with
their possible values, and intents as user intents. System actions are the
act names of SYSTEM frames seen in the converted dialogues.
"""

import argparse
import json
import sys
from pathlib import Path


def read_json(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def load_split(split_dir):
    dialogues = []
    for path in sorted(split_dir.glob("dialogues_*.json")):
        dialogues.extend(read_json(path))
    dialogues.sort(key=lambda d: d["dialogue_id"])
    return dialogues


def convert_dialogues(raw, limit=None):
    out = []
    for dialogue in raw:
        turns = []
        for turn in dialogue["turns"]:
            text = " ".join(turn.get("utterance", "").split())
            if text:
                turns.append({"speaker": turn["speaker"].lower(), "text": text})
        if turns:
            out.append({"id": dialogue["dialogue_id"], "turns": turns})
        if limit is not None and len(out) >= limit:
            break
    return out


def normalize(label):
    return " ".join(label.replace("_", " ").split()).lower()


def gold_from_schema(schema, raw):
    slots, values, intents = {}, {}, set()
    for service in schema:
        domain = normalize(service["service_name"])
        slots[domain] = sorted({normalize(s["name"]) for s in service["slots"]})
        domain_values = {}
        for s in service["slots"]:
            vals = sorted({normalize(v) for v in s.get("possible_values", []) if v.strip()})
            if vals:
                domain_values[normalize(s["name"])] = vals
        values[domain] = dict(sorted(domain_values.items()))
        intents.update(normalize(i["name"]) for i in service["intents"])
    actions = set()
    for dialogue in raw:
        for turn in dialogue["turns"]:
            if turn["speaker"].upper() != "SYSTEM":
                continue
            for frame in turn.get("frames", []):
                actions.update(normalize(a["act"]) for a in frame.get("actions", []))
    domains = sorted(slots)
    return {
        "domains": domains,
        "slots": {d: slots[d] for d in domains},
        "values": {d: values[d] for d in domains},
        "user_intents": sorted(intents),
        "system_actions": sorted(actions),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("split", type=Path, help="SGD split directory, e.g. dstc8-schema-guided-dialogue/test")
    parser.add_argument("--out", type=Path, required=True, help="output dialogue file")
    parser.add_argument("--limit", type=int, help="keep the first N dialogues by id")
    parser.add_argument("--gold-out", type=Path, help="output gold ontology file (reads <split>/schema.json)")
    args = parser.parse_args(argv)

    raw = load_split(args.split)
    if not raw:
        parser.error(f"no dialogues_*.json files in {args.split}")
    dialogues = convert_dialogues(raw, args.limit)
    args.out.write_text(json.dumps(dialogues, indent=1, ensure_ascii=False) + "\n", encoding="utf-8")
    print(f"{len(dialogues)} dialogues -> {args.out}", file=sys.stderr)

    if args.gold_out:
        kept = {d["id"] for d in dialogues}
        gold = gold_from_schema(read_json(args.split / "schema.json"),
                                [d for d in raw if d["dialogue_id"] in kept])
        args.gold_out.write_text(json.dumps(gold, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
        print(f"{len(gold['domains'])} domains -> {args.gold_out}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())

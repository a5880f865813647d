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
"""Convert MultiWOZ 2.x data into the generic dialogue and ontology schemas.

Dialogues: data.json (id -> {"log": [...]}) becomes a JSON array of
{"id", "turns": [{"speaker", "text"}]}, turns alternating user/system.

Gold ontology (optional): ontology.json keys such as "hotel-semi-area" give
domains, slots and values. Per-turn
dialog acts in data.json give user intents and system actions.
"""

import argparse
import json
import sys
from collections import defaultdict
from pathlib import Path


def read_json(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def read_ids(path):
    ids = set()
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                ids.add(line if line.endswith(".json") else line + ".json")
    return ids


def convert_dialogues(data, ids=None, limit=None):
    out = []
    for dial_id in sorted(data):
        if ids is not None and dial_id not in ids:
            continue
        turns = []
        for i, entry in enumerate(data[dial_id]["log"]):
            text = " ".join(entry.get("text", "").split())
            if text:
                turns.append({"speaker": "user" if i % 2 == 0 else "system", "text": text})
        if turns:
            out.append({"id": dial_id.removesuffix(".json"), "turns": turns})
        if limit is not None and len(out) >= limit:
            break
    return out


def normalize(label):
    return " ".join(label.replace("-", " ").split()).lower()


# Values that mark an unfilled or unconstrained slot, not a real value.
PLACEHOLDER_VALUES = {"", "none", "not mentioned", "dontcare", "do n't care", "?"}


def gold_from_ontology(ontology, data, ids=None):
    slots = defaultdict(set)
    values = defaultdict(lambda: defaultdict(set))
    for key, vals in ontology.items():
        # "hotel-semi-area" (2.0) or "hotel-book stay" (2.1+).
        parts = key.split("-")
        domain, slot = normalize(parts[0]), normalize(parts[-1])
        slots[domain].add(slot)
        for v in vals:
            if normalize(v) not in PLACEHOLDER_VALUES:
                values[domain][slot].add(normalize(v))
    # Per-turn "dialog_act" maps "Domain-Act" to slot/value pairs. User acts
    # become intents "<act>_<domain>"; system acts become actions "<act>".
    user_intents, system_actions = set(), set()
    for dial_id, dialogue in data.items():
        if ids is not None and dial_id not in ids:
            continue
        for i, entry in enumerate(dialogue["log"]):
            for act_name in entry.get("dialog_act") or {}:
                domain, _, act = act_name.partition("-")
                if not act:
                    continue
                if i % 2 == 0:
                    user_intents.add(normalize(act) + "_" + normalize(domain))
                else:
                    system_actions.add(normalize(act))
    domains = sorted(slots)
    return {
        "domains": domains,
        "slots": {d: sorted(slots[d]) for d in domains},
        "values": {d: {s: sorted(v) for s, v in sorted(values[d].items()) if v} for d in domains},
        "user_intents": sorted(user_intents),
        "system_actions": sorted(system_actions),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("data", type=Path, help="MultiWOZ data.json")
    parser.add_argument("--out", type=Path, required=True, help="output dialogue file")
    parser.add_argument("--ids", type=Path, help="split list, e.g. testListFile.txt")
    parser.add_argument("--limit", type=int, help="keep the first N dialogues by id")
    parser.add_argument("--ontology", type=Path, help="MultiWOZ ontology.json")
    parser.add_argument("--gold-out", type=Path, help="output gold ontology file")
    args = parser.parse_args(argv)

    ids = read_ids(args.ids) if args.ids else None
    data = read_json(args.data)
    dialogues = convert_dialogues(data, ids, args.limit)
    args.out.write_text(json.dumps(dialogues, indent=1, ensure_ascii=False) + "\n", encoding="utf-8")
    print(f"{len(dialogues)} dialogues -> {args.out}", file=sys.stderr)

    if args.gold_out:
        if not args.ontology:
            parser.error("--gold-out needs --ontology")
        kept = {d["id"] + ".json" for d in dialogues}
        gold = gold_from_ontology(read_json(args.ontology), data, kept)
        args.gold_out.write_text(json.dumps(gold, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
        print(f"{len(gold['domains'])} domains -> {args.gold_out}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())

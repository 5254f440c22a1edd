"""Writes the shared wire-protocol golden files.

exchanges.json pairs each request body with a conforming response.
requests.jsonl holds the exact envelope bytes the engine writes when the
exchanges are issued in order over a stream backend.
violations.json lists responses a conforming client must reject.
"""
import json

spans = [
    {"text": "a dog", "head_noun": "dog", "char_start": 0, "char_end": 5},
    {"text": "the grass", "head_noun": "grass", "char_start": 9, "char_end": 18},
]
exchanges = [
    ("extract_spans", {"caption": "a dog on the grass"}, {"spans": spans}),
    ("generate_questions", {"caption": "a dog on the grass", "spans": spans},
     {"questions": [{"question": "What is on the grass?", "span_index": 0},
                    {"question": "Where is the dog?", "span_index": 1}]}),
    ("answer_text", {"question": "What is on the grass?", "context": "a dog on the grass"},
     {"answer": "a dog", "p_unanswerable": 0.02}),
    ("answer_visual", {"question": "What animal is on the grass?", "image_id": "img-0001"},
     {"answer": "dog", "p_unanswerable": 0.05}),
    ("answer_visual", {"question": "What is the man riding?", "image_id": "img-0001"},
     {"answer": "unanswerable", "p_unanswerable": 0.9}),
    ("similarity", {"a": "dog", "b": "dog"}, {"score": 1.0}),
]
violations = [
    ("answer_text", {"answer": "a dog"}),
    ("answer_text", {"answer": "a dog", "p_unanswerable": 1.5}),
    ("answer_text", {"answer": 3, "p_unanswerable": 0.1}),
    ("answer_visual", {"answer": "dog", "p_unanswerable": -0.1}),
    ("similarity", {"score": "high"}),
    ("similarity", {}),
    ("generate_questions", {"questions": [{"question": "Where is the dog?", "span_index": 1}]}),
    ("generate_questions", {"questions": [{"question": "", "span_index": 0},
                                          {"question": "Where?", "span_index": 1}]}),
    ("generate_questions", {"questions": [{"question": "What?", "span_index": 1},
                                          {"question": "Where?", "span_index": 1}]}),
    ("extract_spans", {"spans": "a dog"}),
    ("extract_spans", {"spans": [{"text": "a dog"}]}),
]


def dump(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


with open("exchanges.json", "w") as f:
    json.dump({"backend_id": "wire-golden",
               "entries": [{"capability": c, "request": q, "response": r}
                           for c, q, r in exchanges]}, f, indent=1, sort_keys=True)
    f.write("\n")
with open("requests.jsonl", "w") as f:
    for i, (c, q, _) in enumerate(exchanges, start=1):
        f.write(dump({"capability": c, "id": i, "request": q}) + "\n")
with open("violations.json", "w") as f:
    json.dump([{"capability": c, "response": r} for c, r in violations], f, indent=1,
              sort_keys=True)
    f.write("\n")

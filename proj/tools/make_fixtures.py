#!/usr/bin/env python3
"""Writes the synthetic fixture corpus under fixtures/ (deterministic)."""

import json
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent / "fixtures"
CATEGORIES = ["dog", "car", "person", "ball", "bicycle", "cat", "bus", "bird"]
MOVES = {"left": (-1, 0), "right": (1, 0), "up": (0, -1), "down": (0, 1)}


def write_jsonl(path, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        for r in rows:
            f.write(json.dumps(r, sort_keys=True) + "\n")


def write_json(path, doc):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(doc, f, indent=1, sort_keys=True)
        f.write("\n")


def track(rng, object_id, category, frames, style):
    x, y = rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7)
    dx, dy = MOVES[rng.choice(list(MOVES))]
    span = rng.uniform(0.25, 0.45) if style != "still" else 0.02
    boxes = []
    for k, f in enumerate(frames):
        t = k / (len(frames) - 1)
        jitter = 0.01 if style == "jitter" else 0.0
        cx = min(max(x + dx * span * (t - 0.5) + rng.uniform(-jitter, jitter), 0.02), 0.98)
        cy = min(max(y + dy * span * (t - 0.5) + rng.uniform(-jitter, jitter), 0.02), 0.98)
        if style == "turn" and t > 0.5:
            cx = min(max(x + dx * span * 0.0 - dy * span * (t - 0.5), 0.02), 0.98)
            cy = min(max(y + dy * span * 0.0 - dx * span * (t - 0.5), 0.02), 0.98)
        boxes.append({"frame_index": f, "x_center": round(cx, 4), "y_center": round(cy, 4),
                      "width": 0.1, "height": 0.12})
    return {"object_id": object_id, "category": category, "boxes": boxes}


def tracks_corpus(rng):
    rows = []
    for i in range(80):
        frames = list(range(0, 90, 6))
        n = rng.choice([1, 1, 2, 3])
        cats = [rng.choice(CATEGORIES) for _ in range(n)]
        if i % 13 == 0:
            cats = ["person"] * 4  # crowded category
        tracks = [track(rng, f"o{j}", c, frames, rng.choice(["clean", "clean", "jitter", "still", "turn"]))
                  for j, c in enumerate(cats)]
        rows.append({"clip_id": f"trk{i:03d}", "video_uri": f"videos/trk{i:03d}.mp4", "fps": 30,
                     "frame_count": 90, "frame_width": 640, "frame_height": 360, "tracks": tracks})
    # VidOR-style records: pixel boxes on every frame.
    for i in range(6):
        dx, dy = MOVES[list(MOVES)[i % 4]]
        traj = []
        for f in range(24):
            cx, cy = 320 + dx * 8 * (f - 12), 180 + dy * 5 * (f - 12)
            traj.append([{"tid": 0, "bbox": {"xmin": cx - 30, "ymin": cy - 20, "xmax": cx + 30, "ymax": cy + 20}}])
        rows.append({"video_id": f"vidor{i:02d}", "fps": 24, "frame_count": 24, "width": 640, "height": 360,
                     "subject/objects": [{"tid": 0, "category": CATEGORIES[i]}], "trajectories": traj})
    return rows


GOALS = {
    "make a salad": ["wash the lettuce", "chop the tomatoes", "slice the cucumber", "mix the vegetables",
                     "add the dressing", "toss the salad", "serve the salad", "add salt", "grate cheese"],
    "repair a bicycle tire": ["remove the wheel", "take off the tire", "pull out the tube", "find the puncture",
                              "patch the tube", "reinsert the tube", "mount the tire", "inflate the tire",
                              "reattach the wheel"],
    "bake cookies": ["preheat the oven", "mix butter and sugar", "add the eggs", "stir in the flour",
                     "add chocolate chips", "scoop the dough", "bake the tray", "cool the cookies"],
    "paint a wall": ["move the furniture", "lay drop cloths", "tape the edges", "stir the paint",
                     "paint the edges", "roll the wall", "apply a second coat", "remove the tape"],
    "plant a tree": ["dig a hole", "loosen the roots", "place the tree", "fill the hole", "tamp the soil",
                     "water the tree", "add mulch"],
}


def goal_corpus(rng):
    rows = []
    names = sorted(GOALS)
    for i in range(60):
        goal = names[i % len(names)]
        pool = GOALS[goal]
        n = rng.choice([2, 3, 4, 5, 6, 7, 8, 18]) if i % 7 else 2
        t = 0.0
        segments = []
        for k in range(n):
            start = t + rng.uniform(0.5, 3.0)
            end = start + rng.uniform(2.0, 8.0)
            t = end
            desc = pool[k % len(pool)] if n <= len(pool) else f"{pool[k % len(pool)]} ({k // len(pool) + 1})"
            essential = "essential" if (i % 11 != 0 and rng.random() < 0.8) else "optional"
            segments.append({"step_description": desc, "start_time": round(start, 2), "end_time": round(end, 2),
                             "is_relevant": essential})
        duration = round(t + 5.0, 2)
        rows.append({"video_uid": f"goal{i:03d}", "goal_description": goal, "duration": duration, "fps": 30,
                     "frame_width": 1280, "frame_height": 720, "segments": segments})
    return rows


ACTIVITIES = ["a man opens the door", "a woman pours coffee", "the dog jumps over the fence",
              "a child kicks the ball", "someone waves at the camera", "the chef flips the pancake",
              "a cyclist rides past", "two people shake hands", "the crowd applauds", "a car parks"]


def caption_corpus(rng):
    doc = {}
    for i in range(60):
        duration = round(rng.uniform(30, 180), 2)
        stamps, sentences = [], []
        for _ in range(rng.choice([2, 3, 4])):
            length = duration * rng.choice([rng.uniform(0.05, 0.3), rng.uniform(0.35, 0.6), rng.uniform(0.7, 0.95)])
            start = rng.uniform(0, duration - length)
            stamps.append([round(start, 2), round(start + length, 2)])
            sentences.append(rng.choice(ACTIVITIES))
        doc[f"v_cap{i:03d}"] = {"duration": duration, "timestamps": stamps, "sentences": sentences}
    return doc


ACTIONS = ["open_door", "close_door", "pick_up_cup", "drink_water", "sit_down", "stand_up", "turn_on_light",
           "read_book", "put_down_phone", "walk_to_window"]


def action_corpus(rng):
    rows = []
    for i in range(70):
        n = rng.choice([3, 4, 5, 6])
        t = 0.0
        acts = []
        for _ in range(n):
            start = t + rng.uniform(0.2, 2.0)
            end = start + rng.choice([rng.uniform(0.3, 0.9), rng.uniform(1.5, 6.0), rng.uniform(1.5, 6.0)])
            t = end
            acts.append((rng.choice(ACTIONS), round(start, 2), round(end, 2)))
        duration = round(t + 2.0, 2)
        rec = {"clip_id": f"act{i:03d}", "duration_s": duration, "fps": 24, "frame_width": 480, "frame_height": 270}
        if i % 2:
            rec["actions"] = ";".join(f"{a} {s:.2f} {e:.2f}" for a, s, e in acts)
        else:
            rec["actions"] = [{"label": a.replace("_", " "), "start": s, "end": e} for a, s, e in acts]
        rows.append(rec)
    return rows


QUESTIONS = [
    ("What color is the car?", "The car is red."),
    ("What is the person holding?", "A blue umbrella."),
    ("Describe the scene.", "A busy street with shops on both sides."),
    ("How many dogs are visible?", "There are two dogs."),
    ("What happens after the man sits down?", "He starts reading a newspaper."),
    ("What does the woman do first?", "She opens the fridge."),
    ("Where is the cat sitting?", "On the windowsill."),
    ("What is the weather like?", "It is sunny."),
    ("When does the ball hit the ground?", "Near the end of the video."),
    ("What sport is being played?", "Tennis."),
]


def instruction_dataset(rng, n):
    rows = []
    for i in range(n):
        q, a = QUESTIONS[rng.randrange(len(QUESTIONS))]
        frames = rng.choice([4, 8, 16, 16, 32]) if i % 50 == 0 else rng.choice([8, 16, 16, 32])
        if i % 3 == 0:
            rows.append({"id": f"inst{i:05d}", "video": f"videos/inst{i:05d}.mp4", "num_frames": frames,
                         "conversations": [{"from": "human", "value": "<video>\n" + q}, {"from": "gpt", "value": a}]})
        else:
            rec = {"sample_id": f"inst{i:05d}", "video_uri": f"videos/inst{i:05d}.mp4", "frame_count": frames,
                   "conversation": [{"role": "user", "text": q}, {"role": "assistant", "text": a}]}
            if i % 5 == 0:
                rec["temporal_flag"] = False
            rows.append(rec)
    return rows


def main():
    rng = random.Random(20240611)
    write_jsonl(ROOT / "corpus" / "tracks.jsonl", tracks_corpus(rng))
    write_json(ROOT / "corpus" / "goalsteps.json", goal_corpus(rng))
    write_json(ROOT / "corpus" / "captions.json", caption_corpus(rng))
    write_jsonl(ROOT / "corpus" / "actions.jsonl", action_corpus(rng))
    write_jsonl(ROOT / "mtp" / "instructions.jsonl", instruction_dataset(rng, 400))


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Regenerates fixtures/corpus.json and fixtures/llm/*.txt.

The corpus is hand-shaped so that, for the topic "communication theory"
with five concepts at medium length:

- concepts 1-3 fill pass 1 of the duration filter,
- concept 4 needs both the widened band and the fallback query,
- concept 5 needs the widened band only,
- concepts 1 and 3 each contain a near-duplicate re-upload,
- unavailable, zero-length and out-of-band videos are mixed in,
- no video matches the keyword query of a concept other than its own.

Run from the repository root: python3 scripts/gen_fixtures.py
"""

import hashlib
import json
import os
import struct

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
FIX = os.path.join(ROOT, "fixtures")
LLM = os.path.join(FIX, "llm")


def digest(kind, params):
    h = hashlib.sha256()
    h.update(kind.encode())
    h.update(b"\0")
    for k in sorted(params):
        v = params[k]
        kb, vb = k.encode(), v.encode()
        h.update(struct.pack("<Q", len(kb)))
        h.update(kb)
        h.update(struct.pack("<Q", len(vb)))
        h.update(vb)
    return h.hexdigest()[:16]


def mmss(text):
    m, s = text.split(":")
    return int(m) * 60 + int(s)


# id, title, duration, views, tags, description, transcript?, extra
VIDEOS = {
    # Basic Communication Models
    "bcm-shannon": ("Shannon-Weaver Model Explained", "14:20", 120000,
                    ["shannon", "weaver", "transmission"],
                    "How the transmission view of communication breaks a message into source, "
                    "transmitter, channel, noise and receiver.", True, {"chapters": True}),
    "bcm-shannon-re": ("Shannon Weaver Model Explained", "14:20", 3000,
                       ["shannon", "weaver", "transmission"],
                       "Re-upload of a lecture on the transmission view of communication.", True, {}),
    "bcm-three": ("Linear, Interactive and Transactional Models", "11:05", 80000,
                  ["linear", "interactive", "transactional"],
                  "Three families of communication models compared side by side.", True,
                  {"chapters": True}),
    "bcm-schramm": ("Schramm's Interactive Model of Communication", "16:40", 45000,
                    ["schramm", "feedback", "field of experience"],
                    "Fields of experience, encoding and feedback in Schramm's communication models.",
                    True, {}),
    "bcm-barnlund": ("Barnlund's Transactional Model", "12:10", 30000, [],
                     "Simultaneous sending and receiving in basic communication models.", False, {}),
    "bcm-berlo": ("Berlo's SMCR Model", "19:30", 52000, ["berlo", "smcr"],
                  "Source, message, channel, receiver: a basic communication model.", True,
                  {"available": False}),
    "bcm-overview": ("Models of Communication: Basic Concepts", "21:00", 15000,
                     ["models", "basics"],
                     "A slower walk through basic communication models with worked examples.",
                     True, {}),
    "bcm-encoding": ("Encoding and Decoding in Basic Models", "13:00", 9000, [],
                     "Where meaning is encoded and decoded in the simplest models.", True, {}),
    "bcm-quick": ("Communication Models in 5 Minutes", "5:00", 200000, ["models"],
                  "A quick tour of basic communication models.", True, {}),
    # Interpersonal Communication
    "ipc-johari": ("Self-Disclosure and the Johari Window", "13:30", 60000,
                   ["interpersonal", "self-disclosure"],
                   "What we reveal and conceal in close relationships.", True, {"chapters": True}),
    "ipc-penetration": ("Social Penetration in Interpersonal Communication", "17:45", 41000,
                        ["onion model"], "Breadth and depth of disclosure as relationships grow.",
                        True, {}),
    "ipc-listening": ("Active Listening Skills", "10:30", 150000, ["listening", "interpersonal"],
                      "Paraphrasing, questioning and attending in interpersonal settings.", True, {}),
    "ipc-nonverbal": ("Nonverbal Cues in Conversation", "15:00", 70000,
                      ["nonverbal", "interpersonal"],
                      "Gesture, proximity and tone in face-to-face talk.", False, {"chapters": True}),
    "ipc-uncertainty": ("Uncertainty Reduction in Interpersonal Communication", "18:20", 22000,
                        ["uncertainty"], "Why strangers ask questions and how they predict each other.",
                        True, {}),
    "ipc-conflict": ("Interpersonal Conflict Styles", "14:10", 33000, ["conflict"],
                     "Avoiding, accommodating, competing and collaborating in interpersonal "
                     "communication.", True, {}),
    "ipc-dialectics": ("Relational Dialectics in Interpersonal Communication", "22:00", 18000,
                       ["dialectics"], "Tensions between connection and autonomy in relationships.",
                       True, {}),
    "ipc-lecture": ("The Complete Interpersonal Communication Lecture", "95:00", 5000, [],
                    "A full semester lecture on interpersonal communication.", True, {}),
    # Critical Communication Theory
    "cct-frankfurt": ("Frankfurt School and Critical Theory", "16:00", 90000,
                      ["frankfurt school", "critical"],
                      "Adorno, Horkheimer and the culture industry.", True, {"chapters": True}),
    "cct-habermas": ("Habermas and the Public Sphere", "19:10", 55000, ["critical", "habermas"],
                     "Critical theory of communicative action and the public sphere.", True, {}),
    "cct-hall": ("Cultural Studies and Stuart Hall", "14:40", 47000, ["critical", "cultural studies"],
                 "Encoding, decoding and preferred readings in critical cultural studies.", True, {}),
    "cct-hegemony": ("Hegemony and Ideology Explained", "12:20", 38000, ["gramsci", "critical"],
                     "Gramsci's hegemony and how consent is manufactured.", True, {}),
    "cct-approaches": ("Critical Approaches to Communication", "20:30", 26000, ["power"],
                       "Power, ideology and critique applied to everyday communication.", True, {}),
    "cct-marxist": ("Marxist Critical Theory in 10 Minutes", "10:00", 61000, ["critical", "marxism"],
                    "Base, superstructure and false consciousness.", True, {}),
    "cct-marxist-re": ("Marxist Critical Theory in Ten Minutes", "10:00", 900, ["critical", "marxism"],
                       "Base, superstructure and false consciousness (mirror).", True, {}),
    "cct-feminist": ("Feminist Critical Theory", "23:00", 12000, ["feminism"],
                     "Standpoint and gendered critique.", False, {}),
    # Semiotics and Signs
    "sem-what": ("What Is Semiotics?", "8:00", 85000, ["semiotics", "signs"],
                 "The study of signs in one short lesson.", True, {}),
    "sem-saussure": ("Saussure: Signifier and Signified", "15:30", 64000, ["semiotics", "signs"],
                     "The two halves of the linguistic sign.", True, {"chapters": True}),
    "sem-peirce": ("Peirce's Three Kinds of Signs", "0:00", 30000, ["semiotics", "signs"],
                   "Icon, index and symbol.", False, {}),
    "sem-advertising": ("Semiotics of Advertising Signs", "12:00", 20000, ["advertising"],
                        "Reading adverts as systems of signs.", True, {}),
    "sem-barthes": ("Barthes: Myth and Signs in Semiotics", "26:00", 15000, ["barthes", "myth"],
                    "Second-order signification and modern myth.", True, {}),
    "sem-tutorial": ("Semiotics Tutorial for Beginners", "13:00", 40000,
                     ["tutorial", "beginner"], "Start here if signification is new to you.", True, {}),
    "sem-codes": ("Signs and Codes: A Beginner Tutorial", "17:00", 25000, ["tutorial"],
                  "Codes, conventions and how they are learned.", True, {}),
    "sem-connotation": ("Denotation and Connotation Tutorial", "11:30", 18000,
                        ["semiotics", "tutorial"], "Literal and associated meanings.", True, {}),
    # Media Effects Theory
    "mef-cultivation": ("Media Effects: Cultivation", "13:40", 70000, ["gerbner"],
                        "Heavy viewing and the mean world syndrome.", True, {"chapters": True}),
    "mef-agenda": ("Agenda Setting and Media Effects", "16:15", 50000, ["agenda setting"],
                   "Telling audiences what to think about.", True, {}),
    "mef-uses": ("Uses and Gratifications: Media Effects", "11:50", 44000, ["active audience"],
                 "Audiences choosing media to meet needs.", True, {}),
    "mef-twostep": ("Two-Step Flow of Media Effects", "20:00", 21000, ["opinion leaders"],
                    "Opinion leaders between mass media and the public.", True, {}),
    "mef-framing": ("Framing Effects in News Media", "28:00", 30000, ["framing"],
                    "How news frames shape interpretation.", True, {}),
    "mef-spiral": ("Spiral of Silence: Media Effects", "9:30", 36000, ["noelle-neumann"],
                   "Why perceived minorities fall silent.", False, {}),
    "mef-methods": ("Media Effects Research Methods", "62:00", 8000, ["methods"],
                    "Experiments, surveys and content analysis.", True, {}),
}

PLAYLISTS = {
    "Basic Models Series": ["bcm-shannon", "bcm-three", "bcm-schramm", "bcm-barnlund", "bcm-berlo",
                            "bcm-shannon-re"],
    "Interpersonal Skills": ["ipc-johari", "ipc-penetration", "ipc-listening", "ipc-nonverbal",
                             "ipc-uncertainty"],
    "Critical Perspectives": ["cct-frankfurt", "cct-habermas", "cct-hall", "cct-hegemony"],
    "Semiotics Signs Symbols": ["sem-what", "sem-saussure", "sem-peirce"],
}

SENTENCES = {
    "bcm": [
        "A message starts at a source and is encoded into a signal",
        "the channel carries the signal and noise can distort it on the way",
        "the receiver decodes the signal back into a message",
        "feedback turns a one way line into a loop between two people",
        "each participant brings a field of experience that shapes meaning",
        "transactional models treat both people as senders and receivers at once",
    ],
    "ipc": [
        "self disclosure means sharing information the other person could not otherwise learn",
        "relationships deepen as disclosure grows in breadth and depth",
        "active listening involves paraphrasing and asking open questions",
        "nonverbal cues often carry more weight than the words themselves",
        "people reduce uncertainty about strangers by asking questions",
        "conflict styles range from avoiding to collaborating",
    ],
    "cct": [
        "critical theory asks who benefits from the way messages circulate",
        "the culture industry produces standardized entertainment for mass audiences",
        "hegemony describes consent that feels like common sense",
        "audiences can read a text in preferred negotiated or oppositional ways",
        "the public sphere is a space where citizens debate as equals",
        "ideology works best when it is invisible",
    ],
    "sem": [
        "a sign joins a signifier to a signified",
        "the link between a word and its meaning is arbitrary",
        "icons resemble what they stand for while symbols rely on convention",
        "denotation is the literal meaning and connotation is the associated one",
        "myth is a second order system of signification",
        "codes are shared rules that let us read signs the same way",
    ],
    "mef": [
        "cultivation research links heavy viewing to a meaner view of the world",
        "agenda setting says media tell us what to think about",
        "audiences actively choose media to satisfy needs",
        "opinion leaders pass media messages on to their followers",
        "frames select some aspects of reality and make them salient",
        "people stay silent when they believe their view is in the minority",
    ],
}


def transcript_for(vid, duration):
    bank = SENTENCES[vid.split("-")[0]]
    offset = sum(map(ord, vid)) % len(bank)
    segs = []
    t, i = 0, 0
    while t < duration:
        dur = min(30, duration - t)
        segs.append({"start_s": float(t), "dur_s": float(dur),
                     "text": bank[(offset + i) % len(bank)] + f" ({vid} part {i + 1})"})
        t += 30
        i += 1
    return segs


def chapters_for(duration):
    marks = [0, duration // 3, 2 * duration // 3]
    names = ["Introduction to the idea", "Worked example", "Recap"]
    return [{"start_s": float(m), "title": n} for m, n in zip(marks, names)]


def corpus():
    videos, transcripts = {}, {}
    channels = ["Open Lecture Hall", "Comm Studies Explained", "The Theory Room", "Campus Notes"]
    for n, (vid, (title, dur, views, tags, desc, has_tr, extra)) in enumerate(sorted(VIDEOS.items())):
        d = mmss(dur)
        rec = {
            "title": title,
            "channel": channels[n % len(channels)],
            "duration_s": float(d),
            "description": desc,
            "tags": tags,
            "chapters": chapters_for(d) if extra.get("chapters") and d else [],
            "view_count": views,
        }
        if extra.get("available") is False:
            rec["available"] = False
        videos[vid] = rec
        if has_tr and d:
            transcripts[vid] = transcript_for(vid, d)
    return {"videos": videos, "playlists": PLAYLISTS, "transcripts": transcripts}


CONCEPTS = [
    ("Basic Communication Models",
     "How messages travel from sender to receiver in linear, interactive and transactional models."),
    ("Interpersonal Communication", "How people disclose, listen and manage conflict one to one."),
    ("Critical Communication Theory", "How power and ideology shape which messages circulate."),
    ("Semiotics and Signs", "How signs, codes and myths carry meaning."),
    ("Media Effects Theory", "How mass media shape what audiences think and do."),
]

BLOOM = [[1, 1, 2], [2, 3, 3], [3, 4, 4], [4, 4, 5], [5, 6, 6]]
VERBS = ["Remember", "Understand", "Apply", "Analyze", "Evaluate", "Create"]
LINKS = ["the sender-receiver model", "dyadic feedback", "ideology", "the sign",
         "encoded meaning in mass messages"]


def plan():
    weeks = []
    for w, (label, desc) in enumerate(CONCEPTS):
        videos = []
        for s in range(3):
            level = BLOOM[w][s]
            requires = LINKS[w - 1] if (s == 0 and w > 0) else f"{label.lower()} part {s}"
            unlocks = LINKS[w] if s == 2 else f"{label.lower()} part {s + 1}"
            videos.append({
                "candidate_index": s,
                "bloom_level": level,
                "bloom_verb": VERBS[level - 1],
                "requires_concept": requires,
                "unlocks_concept": unlocks,
                "zpd_rationale": f"Builds directly on {requires}, which the learner has just met.",
                "learning_objective": f"{VERBS[level - 1]} a core idea of {label.lower()}.",
                "why_selected": f"Its transcript works through {label.lower()} with concrete examples.",
                "dependency_explanation": f"Requires {requires}; unlocks {unlocks}.",
                "keywords": label.lower().split()[:2],
            })
        weeks.append({
            "concept": label,
            "focus": desc,
            "bloom_levels": sorted(set(BLOOM[w])),
            "why_this_week_first": f"{label} depends only on ideas from earlier weeks.",
            "videos": videos,
        })
    return {
        "course_title": "Foundations of Communication Theory",
        "course_description": "From transmission models to media effects in five weeks.",
        "bloom_progression": "Remember/Understand -> Understand/Apply -> Apply/Analyze -> "
                             "Analyze/Evaluate/Create",
        "learning_objectives": [
            "Describe the main models of communication.",
            "Analyze messages with critical and semiotic tools.",
            "Evaluate claims about media effects.",
        ],
        "weeks": weeks,
    }


CLASSIFY = [
    ("What does the channel mean in this model?", "A"),
    ("Can you explain noise again?", "A"),
    ("What is the difference between encoding and decoding here?", "A"),
    ("Give me an example of feedback from this lecture", "A"),
    ("What did the speaker say about fields of experience?", "A"),
    ("Explain self-disclosure in simpler words", "A"),
    ("What is a signifier?", "A"),
    ("Why does the presenter call hegemony common sense?", "A"),
    ("What is cultivation according to this video?", "A"),
    ("Summarize the part about opinion leaders", "A"),
    ("Which video explains how audiences decode messages?", "B"),
    ("What should I watch after this one?", "B"),
    ("How does this week connect to next week?", "B"),
    ("Compare the Shannon-Weaver video with the Schramm one", "B"),
    ("Which video covers framing?", "B"),
    ("Is there a video on semiotics later in the pathway?", "B"),
    ("How far am I through the course?", "B"),
    ("Recommend a video to review before media effects", "B"),
    ("Why is critical theory placed before semiotics?", "B"),
    ("Which videos build on interpersonal communication?", "B"),
]

SLOT = {
    "zpd_rationale": "Covers the same step of the week from a different angle, so the learner "
                     "can follow it with what the previous video established.",
    "learning_objective": "Restate and apply the slot's key idea in a new example.",
    "why_selected": "Next-best candidate for this concept by transcript, chapter and tag signals.",
    "dependency_explanation": "Keeps the week's prerequisite chain: it relies on the previous "
                              "video and prepares the next one.",
    "keywords": ["replacement", "review"],
}

ANSWER = ("The current video shows how a message moves from source to receiver and where noise "
          "enters. Focus on the feedback loop: it is what turns a linear model into an "
          "interactive one.")

NOTE_VARIANTS = [
    "- The source encodes a message into a signal that travels over a channel.\n"
    "- Noise is anything that distorts the signal between sender and receiver.\n"
    "- Feedback lets the receiver respond and closes the loop.",
    "- Fields of experience overlap only partly, so shared meaning is never guaranteed.\n"
    "- Transactional models treat both people as senders and receivers at once.",
    "- Decoding is an active step: the receiver rebuilds the message from the signal.\n"
    "- Context changes how the same signal is interpreted.\n"
    "- Examples in this segment show miscommunication caused by mismatched codes.",
]

NOTE_FALLBACK_VARIANTS = [
    "- This part of the video introduces the model's main components.\n"
    "- The presenter connects the components with an everyday example.",
    "- The segment contrasts this idea with the previous model.\n"
    "- The key term here is defined and then applied to a short case.",
]


def write(path, text):
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)


def main():
    os.makedirs(LLM, exist_ok=True)
    for name in os.listdir(LLM):
        if name.endswith(".txt"):
            os.remove(os.path.join(LLM, name))
    write(os.path.join(FIX, "corpus.json"), json.dumps(corpus(), indent=2, sort_keys=True) + "\n")

    cmap = {"description": "Communication theory moves from how messages travel, through how "
                           "people and power shape them, to how signs and media carry meaning.",
            "concepts": [{"label": l, "description": d} for l, d in CONCEPTS]}
    d = digest("concept_map", {"topic": "communication theory", "numConcepts": "5"})
    write(os.path.join(LLM, f"concept_map__{d}.txt"), json.dumps(cmap, indent=2) + "\n")

    write(os.path.join(LLM, "pathway_order__default.txt"), json.dumps(plan(), indent=2) + "\n")
    write(os.path.join(LLM, "slot_order__default.txt"), json.dumps(SLOT, indent=2) + "\n")

    write(os.path.join(LLM, "classify__default.txt"), "A\n")
    labels = []
    for q, label in CLASSIFY:
        write(os.path.join(LLM, f"classify__{digest('classify', {'message': q})}.txt"), label + "\n")
        labels.append({"message": q, "label": label})
    write(os.path.join(FIX, "classify_labels.json"), json.dumps(labels, indent=2) + "\n")

    write(os.path.join(LLM, "answer__default.txt"), ANSWER + "\n")
    sep = "\n=== variant ===\n"
    write(os.path.join(LLM, "note_with_transcript__default.txt"), sep.join(NOTE_VARIANTS) + "\n")
    write(os.path.join(LLM, "note_fallback__default.txt"), sep.join(NOTE_FALLBACK_VARIANTS) + "\n")


if __name__ == "__main__":
    main()

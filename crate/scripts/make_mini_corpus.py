"""Writes the synthetic mini corpus under data/mini.

Output is a pure function of SEED, so rerunning reproduces the files byte
for byte.
"""

import os
import random

SEED = 20190601
DIM = 10
ENCODER_DIM = 16
N_TRAIN = 160
N_TEST = 40

OFFENSIVE = ["idiot", "stupid", "trash", "loser", "liar", "disgusting", "pathetic", "moron", "clown", "fool"]
NEUTRAL = ["great", "love", "thanks", "happy", "game", "music", "friend", "weekend", "coffee", "beautiful"]
FILLER = ["really", "today", "people", "think", "going", "said", "everyone", "always", "back", "still"]
STOP = ["the", "is", "you", "are", "this", "so", "and", "what", "a", "of"]
HASHTAGS = ["#MAGA", "#news", "#Friday", "#sports"]

OUT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "data", "mini")


def vec_line(word, values):
    return word + " " + " ".join(f"{v:.5f}" for v in values)


def word_vectors(rng):
    off_dir = [rng.gauss(0, 1) for _ in range(DIM)]
    table = {}
    for word in OFFENSIVE:
        table[word] = [0.8 * d + rng.gauss(0, 0.6) for d in off_dir]
    for word in NEUTRAL:
        table[word] = [-0.8 * d + rng.gauss(0, 0.6) for d in off_dir]
    return table


def tweet(rng, offensive):
    words = []
    for _ in range(rng.randint(4, 12)):
        r = rng.random()
        if r < 0.3:
            pool = OFFENSIVE if (rng.random() < 0.8) == offensive else NEUTRAL
            words.append(rng.choice(pool))
        elif r < 0.55:
            words.append(rng.choice(FILLER))
        elif r < 0.8:
            words.append(rng.choice(STOP))
        elif r < 0.9:
            words.append("@USER")
        elif r < 0.95:
            words.append(rng.choice(HASHTAGS))
        else:
            words.append("URL")
    if rng.random() < 0.3:
        words[-1] += rng.choice(["!", "!!", "?", "..."])
    if rng.random() < 0.2:
        words[0] = words[0].upper()
    return " ".join(words)


def main():
    rng = random.Random(SEED)
    table = word_vectors(rng)
    encoder_dir = [rng.gauss(0, 1) for _ in range(ENCODER_DIM)]

    rows = []
    for i in range(N_TRAIN + N_TEST):
        offensive = rng.random() < 0.33
        rows.append((str(10000 + 7 * i), tweet(rng, offensive), "OFF" if offensive else "NOT"))
    train, test = rows[:N_TRAIN], rows[N_TRAIN:]

    def write(name, lines):
        with open(os.path.join(OUT, name), "w", encoding="utf-8", newline="\n") as f:
            f.write("".join(line + "\n" for line in lines))

    write("train.tsv", ["id\ttweet\tsubtask_a"] + [f"{i}\t{t}\t{l}" for i, t, l in train])
    write("test.tsv", ["id\ttweet"] + [f"{i}\t{t}" for i, t, _ in test])
    write("test_labels.csv", [f"{i},{l}" for i, _, l in test])
    write("toy.vec", [f"{len(table)} {DIM}"] + [vec_line(w, v) for w, v in table.items()])

    encoded = []
    for i, _, label in rows:
        sign = 1.0 if label == "OFF" else -1.0
        values = [0.3 * sign * d + rng.gauss(0, 1.0) for d in encoder_dir]
        encoded.append(vec_line(i, values))
    write("encoder.txt", encoded)


if __name__ == "__main__":
    main()

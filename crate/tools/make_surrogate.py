"""Generate a synthetic stand-in for the Sleep Health & Lifestyle CSV.

The real file is not redistributable. This script writes a file with the
same 13 columns, category vocabularies (including the mixed "Normal" /
"Normal Weight" spelling) and class counts (None 219, Sleep Apnea 78,
Insomnia 77). Each class has a pool of prototype
people drawn from hand-set class-conditional profiles; rows repeat
prototypes (the real file is highly repetitive) with occasional jitter,
and a small share of rows take an off-class prototype so the task is not
perfectly separable.

    python tools/make_surrogate.py data/sleep_surrogate.csv
"""
import csv
import sys

import numpy as np

SEED = 20240917
HEADER = [
    "Person ID", "Gender", "Age", "Occupation", "Sleep Duration",
    "Quality of Sleep", "Physical Activity Level", "Stress Level",
    "BMI Category", "Blood Pressure", "Heart Rate", "Daily Steps",
    "Sleep Disorder",
]

PROFILES = {
    "None": dict(
        occupations=(["Doctor", "Engineer", "Lawyer", "Accountant", "Nurse",
                      "Teacher", "Software Engineer", "Scientist", "Manager"],
                     [0.28, 0.26, 0.17, 0.13, 0.06, 0.05, 0.02, 0.02, 0.01]),
        male=0.6, age=(39, 8),
        bmi=(["Normal", "Normal Weight", "Overweight"], [0.80, 0.10, 0.10]),
        sleep=(7.4, 0.5), quality=(7.8, 0.9), activity=(58, 15), stress=(4.8, 1.5),
        sys=(122, 4), dia=(80, 3), hr=(68, 2.5), steps=(7200, 1300),
    ),
    "Insomnia": dict(
        occupations=(["Salesperson", "Teacher", "Accountant", "Engineer",
                      "Lawyer", "Doctor", "Sales Representative"],
                     [0.38, 0.30, 0.10, 0.08, 0.06, 0.05, 0.03]),
        male=0.55, age=(43, 6),
        bmi=(["Overweight", "Normal", "Obese", "Normal Weight"], [0.78, 0.12, 0.06, 0.04]),
        sleep=(6.4, 0.35), quality=(5.8, 0.8), activity=(45, 12), stress=(7.0, 1.0),
        sys=(132, 4), dia=(87, 2.5), hr=(71, 2.5), steps=(5800, 900),
    ),
    "Sleep Apnea": dict(
        occupations=(["Nurse", "Doctor", "Teacher", "Lawyer", "Engineer",
                      "Salesperson", "Scientist", "Sales Representative"],
                     [0.70, 0.08, 0.07, 0.05, 0.04, 0.03, 0.02, 0.01]),
        male=0.25, age=(50, 6),
        bmi=(["Overweight", "Obese", "Normal", "Normal Weight"], [0.78, 0.12, 0.06, 0.04]),
        sleep=(7.0, 0.8), quality=(6.9, 1.4), activity=(78, 12), stress=(6.2, 1.9),
        sys=(139, 3.5), dia=(93, 2.5), hr=(76, 4), steps=(8800, 1500),
    ),
}
COUNTS = [("None", 219), ("Sleep Apnea", 78), ("Insomnia", 77)]
SWAP_FRACTION = 0.02
JITTER_FRACTION = 0.4
PROTOTYPES = {"None": 45, "Sleep Apnea": 16, "Insomnia": 16}


def draw(rng, prof):
    occ = rng.choice(prof["occupations"][0], p=prof["occupations"][1])
    bmi = rng.choice(prof["bmi"][0], p=prof["bmi"][1])
    gender = "Male" if rng.random() < prof["male"] else "Female"
    age = int(np.clip(round(rng.normal(*prof["age"])), 27, 59))
    sleep = float(np.clip(round(rng.normal(*prof["sleep"]), 1), 5.8, 8.5))
    quality = int(np.clip(round(rng.normal(*prof["quality"])), 4, 9))
    activity = int(np.clip(round(rng.normal(*prof["activity"]) / 5) * 5, 30, 90))
    stress = int(np.clip(round(rng.normal(*prof["stress"])), 3, 8))
    sys_bp = int(round(rng.normal(*prof["sys"])))
    dia_bp = int(round(rng.normal(*prof["dia"])))
    sys_bp = max(sys_bp, dia_bp + 20)
    hr = int(np.clip(round(rng.normal(*prof["hr"])), 65, 86))
    steps = int(np.clip(round(rng.normal(*prof["steps"]) / 100) * 100, 3000, 10000))
    return [gender, age, occ, sleep, quality, activity, stress, bmi,
            f"{sys_bp}/{dia_bp}", hr, steps]


def jitter(rng, row):
    row = list(row)
    field = rng.integers(0, 4)
    if field == 0:
        row[1] = int(np.clip(row[1] + rng.integers(-2, 3), 27, 59))
    elif field == 1:
        row[3] = float(np.clip(round(row[3] + rng.normal(0, 0.15), 1), 5.8, 8.5))
    elif field == 2:
        row[9] = int(np.clip(row[9] + rng.integers(-1, 2), 65, 86))
    else:
        row[10] = int(np.clip(row[10] + 100 * rng.integers(-3, 4), 3000, 10000))
    return row


def main(out):
    rng = np.random.default_rng(SEED)
    pools = {
        label: [draw(rng, PROFILES[label]) for _ in range(PROTOTYPES[label])]
        for label in PROFILES
    }
    weights = {}
    for label, pool in pools.items():
        w = 1.0 / np.arange(1, len(pool) + 1) ** 0.7
        weights[label] = w / w.sum()
    rows = []
    labels = list(PROFILES)
    for label, count in COUNTS:
        for _ in range(count):
            src = label
            if rng.random() < SWAP_FRACTION:
                src = rng.choice([l for l in labels if l != label])
            row = pools[src][rng.choice(len(pools[src]), p=weights[src])]
            if rng.random() < JITTER_FRACTION:
                row = jitter(rng, row)
            rows.append(list(row) + [label])
    order = rng.permutation(len(rows))
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HEADER)
        for pid, idx in enumerate(order, start=1):
            w.writerow([pid] + rows[idx])


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/sleep_surrogate.csv")

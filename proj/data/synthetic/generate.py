"""Regenerates the small synthetic three-station dataset in this directory.

Wind at Beta trails Alpha by two hours and Gamma trails Beta by two more, so
there is real spatial signal for the attention layers to find.
"""
import csv
import math
import random
from datetime import datetime, timedelta
from pathlib import Path

HOURS = 720
START = datetime(2021, 3, 1)
CITIES = ["Alpha", "Beta", "Gamma"]
LAG = 2

rng = random.Random(20210301)
front = [0.0] * (HOURS + 2 * LAG * len(CITIES))
for t in range(1, len(front)):
    front[t] = 0.9 * front[t - 1] + rng.gauss(0.0, 0.6)

here = Path(__file__).resolve().parent
for c, city in enumerate(CITIES):
    with open(here / f"{city}.csv", "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["timestamp", "wind_speed", "wind_direction", "temperature"])
        for t in range(HOURS):
            shifted = front[t + 2 * LAG * len(CITIES) - LAG * c]
            daily = math.sin(2 * math.pi * (t % 24) / 24.0)
            speed = max(0.0, 6.0 + 2.0 * daily + 1.5 * shifted + rng.gauss(0.0, 0.3))
            direction = (200.0 + 40.0 * shifted + 10.0 * c + rng.gauss(0.0, 5.0)) % 360.0
            temperature = 8.0 + 4.0 * daily - 0.5 * c + rng.gauss(0.0, 0.4)
            out.writerow([
                (START + timedelta(hours=t)).strftime("%Y-%m-%dT%H:%M:%S"),
                f"{speed:.2f}",
                f"{direction:.1f}",
                f"{temperature:.2f}",
            ])

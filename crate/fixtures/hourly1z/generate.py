"""Writes the full-year hourly CSVs of this fixture (deterministic)."""
import math

def row(entity, year, f):
    days = 366 if year % 4 == 0 else 365
    vals = [f(d, h) for d in range(days) for h in range(24)]
    return ",".join([entity, str(year)] + [repr(round(v, 3)) for v in vals])

def header():
    return ",".join(["entity", "year"] + [f"h{i}" for i in range(1, 8785)])

def noise(d, h, k):
    return math.sin(12.9898 * (d * 24 + h) + 78.233 * k) * 0.5

def load(d, h):
    season = 18 * math.cos(2 * math.pi * (d - 200) / 365)
    daily = 22 * math.sin(2 * math.pi * (h - 9) / 24)
    return 110 + season + daily + 4 * noise(d, h, 1)

def solar(d, h):
    if h < 6 or h > 19:
        return 0.0
    peak = 0.75 + 0.2 * math.cos(2 * math.pi * (d - 172) / 365)
    return max(0.0, peak * math.sin(math.pi * (h - 6) / 14) + 0.05 * noise(d, h, 2))

def wind(d, h):
    base = 0.4 + 0.15 * math.cos(2 * math.pi * (d - 15) / 365)
    return min(1.0, max(0.0, base + 0.1 * math.cos(2 * math.pi * h / 24) + 0.2 * noise(d, h, 3)))

with open("load.csv", "w") as f:
    f.write(header() + "\n")
    f.write(row("Z1", 2025, load) + "\n")
with open("availability.csv", "w") as f:
    f.write(header() + "\n")
    f.write(row("spv", 2025, solar) + "\n")
    f.write(row("lbw", 2025, wind) + "\n")

#!/usr/bin/env python3
# Copyright 2026 The LEGIT Toolkit Authors
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
"""Regenerates tests/fixtures from a fixed seed.

usage: make_fixtures.py <path-to-legit-binary> <fixtures-dir>
"""

import json
import random
import subprocess
import sys
from pathlib import Path

WORDS = """
about above across action active actor actual address admit adult advice afraid
after again against agency agent agree ahead allow almost alone along already
also always amount animal annual another answer anyone appear apply area argue
around arrive article artist assume attack author avoid away baby back ball bank
base beat beautiful because become before begin behind believe benefit best
better between beyond bill black blood blue board body book born both break
bring brother budget build building business call camera campaign cancer
candidate capital card care career carry case catch cause cell center central
century certain chair challenge chance change charge check child choice choose
church citizen city civil claim class clear close coach cold collection college
color come common community company compare computer concern condition
conference consider contain continue control cost could country couple course
court cover create crime cultural culture current customer dark data daughter
dead deal death debate decade decide decision deep defense degree describe
design despite detail determine develop difference different difficult dinner
direction director discover discuss disease doctor door down draw dream drive
during each early east easy economic economy edge education effect effort eight
either election else employee energy enjoy enough enter entire environment
especially establish even evening event ever every everybody evidence exactly
example executive exist expect experience expert explain face fact factor fail
fall family fast father fear federal feel field fight figure fill film final
finally financial find fine finger finish fire firm first fish five floor focus
follow food foot force foreign forget form former forward four free friend from
front full fund future game garden general generation girl give glass goal good
government great green ground group grow growth guess hair half hand hang happen
happy hard have head health hear heart heat heavy help here herself high himself
history hold home hope hospital hotel hour house however huge human hundred
husband idea identify image imagine impact important improve include including
increase indeed indicate individual industry information inside instead
institution interest interesting international interview into investment involve
issue item itself join just keep kill kind kitchen know knowledge land language
large last late later laugh lawyer lead leader learn least leave left legal less
letter level life light like likely line list listen little live local long look
lose loss love machine magazine main maintain major majority make manage
management manager many market marriage material matter maybe mean measure media
medical meet meeting member memory mention message method middle might military
million mind minute miss mission model modern moment money month more morning
most mother mouth move movement movie much music must myself name nation
national natural nature near nearly necessary need network never news newspaper
next nice night none north note nothing notice number occur offer office officer
official often once only onto open operation opportunity option order
organization other others outside over owner page pain painting paper parent
part participant particular particularly partner party pass past patient
pattern peace people perform performance perhaps period person personal phone
physical pick picture piece place plan plant play player point police policy
political politics poor popular population position positive possible power
practice prepare present president pressure pretty prevent price private
probably problem process produce product production professional professor
program project property protect prove provide public pull purpose push
quality question quickly quite race radio raise range rate rather reach read
ready real reality realize really reason receive recent recently recognize
record reduce reflect region relate relationship religious remain remember
remove report represent require research resource respond response rest result
return reveal rich right rise risk road rock role room rule safe same save scene
school science scientist score season seat second section security seek seem
sell send senior sense series serious serve service seven several shake share
shoot short shot should shoulder show side sign significant similar simple
simply since sing single sister site situation size skill skin small smile
social society soldier some somebody someone something sometimes song soon sort
sound source south southern space speak special specific speech spend sport
spring staff stage stand standard star start state statement station stay step
still stock stop store story strategy street strong structure student study
stuff style subject success successful such suddenly suffer suggest summer
support sure surface system table take talk task teach teacher team technology
television tell tend term test than thank that their them themselves then theory
there these they thing think third this those though thought thousand threat
three through throughout throw thus time today together tonight total tough
toward town trade traditional training travel treat treatment tree trial trip
trouble true truth turn type under understand unit until upon usually value
various very victim view violence visit voice vote wait walk wall want watch
water weapon wear week weight well west western what whatever when where whether
which while white whole whom whose wide wife will window wish with within without
woman wonder word work worker world worry would write writer wrong yard yeah year
young yourself
""".split()

NEUTRAL_SUBJECTS = ["the weather", "this recipe", "the new library", "my garden",
                    "the morning train", "our team meeting", "the museum visit",
                    "the concert", "your report", "the software update",
                    "the park", "this documentary", "the local bakery",
                    "the hiking trail", "the community event"]
NEUTRAL_PREDICATES = ["was really pleasant today", "looks great to me",
                      "turned out better than expected", "made my whole week",
                      "is worth sharing with friends", "was calm and relaxing",
                      "helped a lot, thank you", "is open again on Monday",
                      "went smoothly this time", "deserves more attention"]
TOXIC_TARGETS = ["you", "this author", "the moderator", "that commenter",
                 "your friend", "the guy above", "people like you", "this poster"]
TOXIC_PREDICATES = ["are a complete idiot", "should shut up forever",
                    "are pathetic and stupid", "are worthless garbage",
                    "are a disgusting loser", "are too dumb to read",
                    "are an ignorant moron", "make me sick, get lost",
                    "are a hateful clown", "deserve nothing but contempt"]


def run(legit, *args):
  out = subprocess.run([legit, "-q", *args], check=True, capture_output=True, text=True)
  return json.loads(out.stdout)


def main():
  legit, fixtures = sys.argv[1], Path(sys.argv[2])
  fixtures.mkdir(parents=True, exist_ok=True)
  rng = random.Random(20260415)

  vocab = sorted(set(w for w in WORDS if 4 <= len(w) <= 14))
  (fixtures / "vocab.txt").write_text("\n".join(vocab) + "\n")

  corpus = []
  for i in range(200):
    toxic = i % 2 == 1
    if toxic:
      text = f"{rng.choice(TOXIC_TARGETS).capitalize()} {rng.choice(TOXIC_PREDICATES)}."
    else:
      text = f"{rng.choice(NEUTRAL_SUBJECTS).capitalize()} {rng.choice(NEUTRAL_PREDICATES)}."
    corpus.append({"text": text, "labels": {"toxic": toxic}})
  rng.shuffle(corpus)
  with open(fixtures / "corpus.jsonl", "w") as f:
    for row in corpus:
      f.write(json.dumps(row) + "\n")

  # Gold pairs: a light rank-1 substitution against a full rank-50 one.
  gold_words = rng.sample(vocab, 40)
  with open(fixtures / "gold.jsonl", "w") as f:
    for i, word in enumerate(gold_words):
      easy = run(legit, "perturb", "--word", word, "--n", "0.25", "--k", "1",
                 "--seed", str(2 * i))["wi"]
      hard = run(legit, "perturb", "--word", word, "--n", "1.0", "--k", "50",
                 "--seed", str(2 * i + 1))["wi"]
      if i % 2 == 0:
        row = {"word": word, "w1": easy, "w2": hard, "label": "L1"}
      else:
        row = {"word": word, "w1": hard, "w2": easy, "label": "L2"}
      f.write(json.dumps(row, ensure_ascii=False) + "\n")

  # Synthetic annotations: a perturbation counts as legible when its mean
  # ImgDot distance is below 0.041, which makes about 51% of the derived
  # classification examples legible. Then the shipped scorer.
  synth = fixtures / "synth_annotations.jsonl"
  run(legit, "dataset", "synth", "--vocab", str(fixtures / "vocab.txt"),
      "--threshold", "0.041", "--pairs-per-word", "3", "--seed", "0", "--out", str(synth))
  run(legit, "train", "--data", str(synth), "--out", str(fixtures / "scorer.json"),
      "--seed", "0")


if __name__ == "__main__":
  main()

"""The fifty seeded question templates and the generator built on them.

Every template is a draw function (parameters from the RNG, inside the
stated ranges) plus a pure build function (parameters -> question text and
typed gold). The split keeps golds recomputable from the question alone
and lets tests drive builds with chosen parameters (singular matrices,
zero discriminants) that random draws would essentially never produce.

Reproducibility: the per-pair seed_trace is drawn from the master seed,
and `generate_pair(seed_trace, templates)` rebuilds the identical pair.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence, TextIO

from ..rng import SplitMix64
from .answers import (DecimalAnswer, DecimalListAnswer, GoldAnswer, IntegerAnswer,
                      IntListAnswer, MatrixAnswer, SpecialAnswer, TextAnswer,
                      answer_from_dict, answer_to_dict)

ALL_TEMPLATE_IDS: tuple[int, ...] = tuple(range(1, 51))

_LOWER = "abcdefghijklmnopqrstuvwxyz"


@dataclass(frozen=True)
class QAPair:
    question: str
    answer: GoldAnswer
    template_id: int
    seed_trace: int


# --------------------------------------------------------------------------
# Shared math helpers

def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    for d in range(3, math.isqrt(n) + 1, 2):
        if n % d == 0:
            return False
    return True


def next_prime(x: int) -> int:
    """Smallest prime strictly greater than x, by trial division."""
    n = x + 1
    while not _is_prime(n):
        n += 1
    return n


def first_n_primes(n: int) -> list[int]:
    primes: list[int] = []
    candidate = 2
    while len(primes) < n:
        if _is_prime(candidate):
            primes.append(candidate)
        candidate += 1
    return primes


def is_leap_year(year: int) -> bool:
    return year % 4 == 0 and (year % 100 != 0 or year % 400 == 0)


def exact_inverse(matrix: Sequence[Sequence[int]]) -> list[list[Fraction]] | None:
    """Gauss-Jordan over exact fractions; None iff the matrix is singular.
    Exactness means a zero determinant can never be misread as tiny-but-
    nonzero (or vice versa)."""
    n = len(matrix)
    aug = [[Fraction(matrix[i][j]) for j in range(n)]
           + [Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]
    for col in range(n):
        pivot_row = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot_row is None:
            return None
        aug[col], aug[pivot_row] = aug[pivot_row], aug[col]
        pivot = aug[col][col]
        aug[col] = [x / pivot for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                factor = aug[r][col]
                aug[r] = [a - factor * b for a, b in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def _first_occurrence_unique(items: Sequence[int]) -> list[int]:
    return list(dict.fromkeys(items))


def top_two_words(paragraph: str) -> str:
    """Most common word concatenated with the second most common; ties
    break toward earlier first occurrence."""
    words = paragraph.lower().split()
    counts: dict[str, int] = {}
    first_idx: dict[str, int] = {}
    for i, w in enumerate(words):
        counts[w] = counts.get(w, 0) + 1
        first_idx.setdefault(w, i)
    ranked = sorted(counts, key=lambda w: (-counts[w], first_idx[w]))
    return ranked[0] + ranked[1]


def recurring_pair(paragraph: str) -> str:
    """First word seen twice, concatenated with the next distinct word seen
    twice after it."""
    seen: set[str] = set()
    first: str | None = None
    second: str | None = None
    for word in paragraph.lower().split():
        if word in seen:
            if first is None:
                first = word
            elif second is None and word != first:
                second = word
                break
        seen.add(word)
    assert first is not None and second is not None
    return first + second


# Fixed reference offsets (minutes east of UTC) for the timezone template;
# no DST modeling, so questions stay hermetic and answers exact.
ZONE_OFFSET_MINUTES: dict[str, int] = {
    "Pacific/Midway": -660, "Pacific/Honolulu": -600, "America/Anchorage": -540,
    "America/Los_Angeles": -480, "America/Denver": -420, "America/Chicago": -360,
    "America/New_York": -300, "America/Caracas": -240, "America/St_Johns": -210,
    "America/Sao_Paulo": -180, "Atlantic/South_Georgia": -120, "Atlantic/Azores": -60,
    "UTC": 0, "Europe/London": 0, "Europe/Paris": 60, "Europe/Athens": 120,
    "Africa/Nairobi": 180, "Asia/Dubai": 240, "Asia/Karachi": 300,
    "Asia/Kolkata": 330, "Asia/Kathmandu": 345, "Asia/Dhaka": 360,
    "Asia/Yangon": 390, "Asia/Bangkok": 420, "Asia/Shanghai": 480,
    "Asia/Tokyo": 540, "Australia/Adelaide": 570, "Australia/Sydney": 600,
    "Pacific/Noumea": 660, "Pacific/Auckland": 720,
}
_ZONE_NAMES = tuple(ZONE_OFFSET_MINUTES)


# --------------------------------------------------------------------------
# Templates. Draw functions sample parameters; build functions are pure.

def _int_list(rng: SplitMix64, lo: int, hi: int, n_lo: int, n_hi: int) -> list[int]:
    return [rng.randint(lo, hi) for _ in range(rng.randint(n_lo, n_hi))]


# 1. average of an array
def _draw_average(rng):
    return {"array": [round(rng.uniform(-10000, 10000)) for _ in range(rng.randint(5, 15))]}

def _build_average(array):
    q = f"Calculate the average of the array {array} and round the result to two decimal places."
    return q, DecimalAnswer(round(sum(array) / len(array), 2))


# 2. max or min, scaled by 7
def _draw_extreme(rng):
    array = [round(rng.uniform(-10000, 10000)) for _ in range(rng.randint(5, 15))]
    return {"array": array, "which": rng.choice(["maximum", "minimum"])}

def _build_extreme(array, which):
    q = f"Find the {which} value of the array {array}, give the result of multiplying it by 7."
    value = max(array) if which == "maximum" else min(array)
    return q, IntegerAnswer(value * 7)


# 3. dot product
def _draw_dot(rng):
    length = rng.randint(5, 15)
    return {"array1": [rng.randint(20, 1000) for _ in range(length)],
            "array2": [rng.randint(20, 1000) for _ in range(length)]}

def _build_dot(array1, array2):
    q = f"Calculate the dot product of the arrays {array1} and {array2}."
    return q, IntegerAnswer(sum(x * y for x, y in zip(array1, array2)))


# 4. sort ascending
def _draw_sort(rng):
    return {"array": _int_list(rng, -10000, 10000, 5, 15)}

def _build_sort(array):
    return f"Sort the array {array} in ascending order.", IntListAnswer(tuple(sorted(array)))


# 5. sum of integers
def _draw_sum(rng):
    return {"array": _int_list(rng, 1000, 100000, 5, 15)}

def _build_sum(array):
    q = f"Here is a set of random integers {array}, please find their sum."
    return q, IntegerAnswer(sum(array))


# 6. smallest prime greater than x
def _draw_next_prime(rng):
    return {"num": rng.randint(2000, 100000)}

def _build_next_prime(num):
    return f"Generate the smallest prime number greater than {num}.", IntegerAnswer(next_prime(num))


# 7. population standard deviation
def _draw_stddev(rng):
    return {"array": [round(rng.uniform(10, 1000), 2) for _ in range(rng.randint(5, 15))]}

def _build_stddev(array):
    q = f"Calculate the standard deviation of the array {array} and round the result to two decimal places."
    mean = sum(array) / len(array)
    variance = sum((x - mean) ** 2 for x in array) / len(array)
    return q, DecimalAnswer(round(variance ** 0.5, 2))


# 8. matrix inverse (or "not invertible")
def _draw_inverse(rng):
    n = rng.randint(2, 10)
    return {"matrix": [[rng.randint(1, 1000) for _ in range(n)] for _ in range(n)]}

def _build_inverse(matrix):
    q = (f"Here is a random matrix {matrix}, please find its inverse, "
         f"you can answer with 'not invertible' if its inverse does not exist.")
    inverse = exact_inverse(matrix)
    if inverse is None:
        return q, SpecialAnswer("not invertible")
    return q, MatrixAnswer(tuple(tuple(float(x) for x in row) for row in inverse))


# 9. character frequency
def _draw_char_freq(rng):
    char = rng.choice(_LOWER)
    string = "".join(rng.choices(_LOWER, rng.randint(50, 100))) + char * 101
    return {"char": char, "string": string}

def _build_char_freq(char, string):
    q = f"Count the frequency of character {char} in the string '{string}'."
    return q, IntegerAnswer(string.count(char))


# 10. square every number
def _draw_squares(rng):
    return {"array": _int_list(rng, 1, 10000, 5, 15)}

def _build_squares(array):
    return f"Square every number in the list {array}.", IntListAnswer(tuple(x ** 2 for x in array))


# 11. median (upper for even length), scaled by 9
def _draw_median(rng):
    return {"array": _int_list(rng, 200000, 10000000, 5, 15)}

def _build_median(array):
    q = f"Find the median of the array {array}, give the result of multiplying it by 9."
    return q, IntegerAnswer(sorted(array)[len(array) // 2] * 9)


# 12. Fibonacci sequence, n terms from 0, 1
def _draw_fibonacci(rng):
    return {"n": rng.randint(5, 20)}

def _build_fibonacci(n):
    fib = [0, 1]
    for _ in range(2, n):
        fib.append(fib[-1] + fib[-2])
    return f"Generate the Fibonacci sequence up to the {n}-th term.", IntListAnswer(tuple(fib))


# 13. transpose
def _draw_transpose(rng):
    n = rng.randint(2, 10)
    return {"matrix": [[rng.randint(-1000, 1000) for _ in range(n)] for _ in range(n)]}

def _build_transpose(matrix):
    transposed = tuple(tuple(row) for row in zip(*matrix))
    return f"Transpose the matrix {matrix}.", MatrixAnswer(transposed)


# 14. reverse and splice
def _draw_reverse_splice(rng):
    return {"string": "".join(rng.choices(_LOWER, rng.randint(10, 20)))}

def _build_reverse_splice(string):
    q = f"Reverse the string {string}, and splice it behind the string 'appleiphone'."
    return q, TextAnswer("appleiphone" + string[::-1])


# 15. GCD, redrawn until it exceeds 100
def _draw_gcd(rng):
    while True:
        a, b = rng.randint(200, 1000000), rng.randint(200, 1000000)
        if math.gcd(a, b) > 100:
            return {"a": a, "b": b}

def _build_gcd(a, b):
    return f"Find the GCD of the numbers {a} and {b}.", IntegerAnswer(math.gcd(a, b))


# 16. factorial
def _draw_factorial(rng):
    return {"num": rng.randint(10, 100)}

def _build_factorial(num):
    return f"Calculate the factorial of {num}.", IntegerAnswer(math.factorial(num))


# 17. mode (ties break to the smallest value), scaled by 3
def _draw_mode(rng):
    return {"array": [rng.randint(113333, 113343) for _ in range(15)]}

def _build_mode(array):
    q = f"Find the mode of the array {array}, give the result of multiplying it by 3."
    best = max(array.count(v) for v in set(array))
    mode = min(v for v in set(array) if array.count(v) == best)
    return q, IntegerAnswer(mode * 3)


# 18. sum of even numbers
def _draw_sum_evens(rng):
    return {"array": _int_list(rng, 1000, 1000000, 10, 25)}

def _build_sum_evens(array):
    q = f"Calculate the sum of even numbers in the list {array}."
    return q, IntegerAnswer(sum(x for x in array if x % 2 == 0))


# 19. cumulative sum
def _draw_cumsum(rng):
    return {"array": _int_list(rng, 1, 10000, 5, 15)}

def _build_cumsum(array):
    sums = tuple(sum(array[:i + 1]) for i in range(len(array)))
    return f"Calculate the cumulative sum of the array {array}.", IntListAnswer(sums)


# 20. first N elements, plus 7 each
def _draw_first_n(rng):
    return {"n": rng.randint(5, 10), "array": _int_list(rng, 1, 10000, 15, 35)}

def _build_first_n(n, array):
    q = f"Extract first {n} elements in the list {array} and then plus 7 for each element in the sub-list."
    return q, IntListAnswer(tuple(a + 7 for a in array[:n]))


# 21. cosine of a half-degree angle
def _draw_cosine(rng):
    return {"degree": rng.randint(0, 360) + 0.5}

def _build_cosine(degree):
    q = f"Calculate cosine value for {degree} degree and round the result to two decimal places."
    return q, DecimalAnswer(round(math.cos(math.radians(degree)), 2))


# 22. reverse, plus 3 each
def _draw_reverse_plus(rng):
    return {"array": _int_list(rng, 1, 10000, 5, 15)}

def _build_reverse_plus(array):
    q = f"Reverse the order of the elements in the list {array} and then plus 3 for each element."
    return q, IntListAnswer(tuple(a + 3 for a in array[::-1]))


# 23. sum of squares
def _draw_sum_squares(rng):
    return {"array": _int_list(rng, 10, 10000, 5, 15)}

def _build_sum_squares(array):
    q = f"Calculate the sum of squares of the numbers in the array {array}."
    return q, IntegerAnswer(sum(x ** 2 for x in array))


# 24. n-th smallest, scaled by 3
def _draw_nth_smallest(rng):
    array = _int_list(rng, 1000, 10000000, 5, 15)
    return {"array": array, "n": rng.randint(1, len(array))}

def _build_nth_smallest(array, n):
    q = f"Find the {n}-th smallest number in the array {array}, give the result of multiplying it by 3."
    return q, IntegerAnswer(sorted(array)[n - 1] * 3)


# 25. Euclidean distance between two points
def _draw_distance(rng):
    return {"x1": round(rng.uniform(-100, 100), 2), "y1": round(rng.uniform(-100, 100), 2),
            "x2": round(rng.uniform(-100, 100), 2), "y2": round(rng.uniform(-100, 100), 2)}

def _build_distance(x1, y1, x2, y2):
    q = (f"Calculate the Euclidean distance between points ({x1}, {y1}) and ({x2}, {y2}), "
         f"round the result to two decimal places.")
    return q, DecimalAnswer(round(math.sqrt((x2 - x1) ** 2 + (y2 - y1) ** 2), 2))


# 26. character intersection of two strings (order-free)
def _draw_intersection(rng):
    return {"str1": "".join(rng.choices(_LOWER, rng.randint(50, 100))),
            "str2": "".join(rng.choices(_LOWER, rng.randint(50, 100)))}

def _build_intersection(str1, str2):
    q = f"Find the intersection of string '{str1}' and string '{str2}'."
    return q, TextAnswer("".join(sorted(set(str1) & set(str2))), char_set=True)


# 27. compound-interest amount
def _draw_interest(rng):
    return {"principal": rng.randint(1000, 10000),
            "rate": round(rng.uniform(1, 10), 2), "years": rng.randint(1, 5)}

def _build_interest(principal, rate, years):
    q = (f"Calculate the compound interest for principal {principal}, rate {rate}%, "
         f"and time {years} years, round the result to two decimal places.")
    return q, DecimalAnswer(round(principal * (1 + rate / 100) ** years, 2))


# 28. longest word length
def _draw_longest_word(rng):
    words = ["".join(rng.choices(_LOWER, rng.randint(101, 200)))
             for _ in range(rng.randint(5, 15))]
    return {"string": " ".join(words)}

def _build_longest_word(string):
    q = f"Find the length of the longest word in the string '{string}'."
    return q, IntegerAnswer(max(len(w) for w in string.split()))


# 29. vowel count
def _draw_vowels(rng):
    return {"string": "".join(rng.choices(_LOWER, rng.randint(20, 50))) + "a" * 101}

def _build_vowels(string):
    q = f"Count the number of vowels in the string '{string}'."
    return q, IntegerAnswer(sum(1 for ch in string if ch in "aeiou"))


# 30. Celsius list to Fahrenheit
def _draw_celsius(rng):
    return {"celsius": [rng.randint(-20, 40) for _ in range(5)]}

def _build_celsius(celsius):
    q = f"Convert the list of Celsius temperatures {celsius} to Fahrenheit, round the result to two decimal places."
    return q, DecimalListAnswer(tuple(round(c * 9 / 5 + 32, 2) for c in celsius))


# 31. offset difference between two named zones
def _draw_timezones(rng):
    tz1, tz2 = rng.sample(_ZONE_NAMES, 2)
    return {"tz1": tz1, "tz2": tz2}

def _build_timezones(tz1, tz2):
    q = f"Calculate time difference between {tz1} and {tz2} in seconds."
    diff = abs(ZONE_OFFSET_MINUTES[tz1] - ZONE_OFFSET_MINUTES[tz2]) * 60
    return q, IntegerAnswer(diff)


# 32. next leap year strictly after a non-leap year
def _draw_leap(rng):
    year = rng.randint(1900, 2100)
    while is_leap_year(year):
        year = rng.randint(1900, 2100)
    return {"year": year}

def _build_leap(year):
    following = next(y for y in range(year + 1, year + 10000) if is_leap_year(y))
    return f"Find the leap year after year {year}.", IntegerAnswer(following)


# 33. two most common words, concatenated
_WORD_POOL = ("apple", "banana", "orange", "grape", "pear", "hello", "iphone", "newspaper")

def _draw_common_words(rng):
    while True:
        paragraph = " ".join(rng.choices(_WORD_POOL, 30))
        if len(set(paragraph.split())) >= 2:
            return {"paragraph": paragraph}

def _build_common_words(paragraph):
    q = (f"Find the most common word in the paragraph '{paragraph}', "
         f"concatenate it with the second common word in this paragraph.")
    return q, TextAnswer(top_two_words(paragraph))


# 34. rectangle perimeter
def _draw_perimeter(rng):
    return {"length": rng.randint(100, 10000), "width": rng.randint(100, 10000)}

def _build_perimeter(length, width):
    q = f"Calculate the perimeter of a rectangle with length {length} and width {width}."
    return q, IntegerAnswer(2 * (length + width))


# 35. digit sum of a long number
def _draw_digit_sum(rng):
    return {"num": int(str(rng.randint(100, 99999)) + "999999999999999")}

def _build_digit_sum(num):
    return f"Sum all the digits of the number {num}.", IntegerAnswer(sum(int(d) for d in str(num)))


# 36. triangle area
def _draw_triangle(rng):
    return {"base": round(rng.uniform(100, 500), 2), "height": round(rng.uniform(100, 500), 2)}

def _build_triangle(base, height):
    q = (f"Calculate the area of a triangle with base {base} and height {height}, "
         f"round the result to two decimal places.")
    return q, DecimalAnswer(round(0.5 * base * height, 2))


# 37. quadratic roots by discriminant
def _draw_quadratic(rng):
    return {"a": round(rng.uniform(10, 200), 2), "b": round(rng.uniform(10, 200), 2),
            "c": round(rng.uniform(10, 200), 2)}

def _build_quadratic(a, b, c):
    q = (f"Find the real roots of the quadratic equation {a}x^2 + {b}x + {c} = 0, "
         f"round the result to two decimal places.")
    discriminant = b ** 2 - 4 * a * c
    if discriminant > 0:
        root1 = (-b + math.sqrt(discriminant)) / (2 * a)
        root2 = (-b - math.sqrt(discriminant)) / (2 * a)
        return q, SpecialAnswer((round(root1, 2), round(root2, 2)))
    if discriminant == 0:
        return q, DecimalAnswer(round(-b / (2 * a), 2))
    return q, SpecialAnswer("no real roots")


# 38. sum of cubes
def _draw_cubes(rng):
    return {"sequence": _int_list(rng, 100, 10000, 5, 15)}

def _build_cubes(sequence):
    q = f"Calculate the sum of the cubes of the list {sequence}."
    return q, IntegerAnswer(sum(n ** 3 for n in sequence))


# 39. round raw floats to two decimal places
def _draw_round_list(rng):
    return {"array": [rng.uniform(100, 10000) for _ in range(rng.randint(5, 15))]}

def _build_round_list(array):
    q = f"Round all elements in the list {array} to two decimal places."
    return q, DecimalListAnswer(tuple(round(x, 2) for x in array))


# 40. first and second recurring words, concatenated
def _draw_recurring(rng):
    words = ["".join(rng.choices(_LOWER, rng.randint(5, 15)))
             for _ in range(rng.randint(5, 10))]
    words = words * 3
    rng.shuffle(words)
    return {"paragraph": " ".join(words)}

def _build_recurring(paragraph):
    q = (f"Find the first recurring word in the paragraph '{paragraph}', "
         f"concatenate it with the second recurring word in this paragraph.")
    return q, TextAnswer(recurring_pair(paragraph))


# 41. hypotenuse
def _draw_hypotenuse(rng):
    return {"side1": rng.randint(100, 20000), "side2": rng.randint(100, 20000)}

def _build_hypotenuse(side1, side2):
    q = (f"Calculate the hypotenuse of a right triangle with sides {side1} and {side2}, "
         f"round the result to two decimal places.")
    return q, DecimalAnswer(round(math.sqrt(side1 ** 2 + side2 ** 2), 2))


# 42. digits of a shuffled string, concatenated in order
def _draw_extract_digits(rng):
    chars = (rng.choices(_LOWER, rng.randint(20, 50))
             + rng.choices("0123456789", rng.randint(20, 50)))
    rng.shuffle(chars)
    return {"string": "".join(chars)}

def _build_extract_digits(string):
    q = f"Extract all the numbers in the string '{string}' in order and concatenate them."
    return q, TextAnswer("".join(ch for ch in string if ch.isdigit()))


# 43. decimal to binary
def _draw_binary(rng):
    return {"num": rng.randint(1000, 1000000)}

def _build_binary(num):
    q = f"Convert the decimal number {num} to its binary equivalent."
    return q, TextAnswer(bin(num)[2:])


# 44. set difference list1 - list2 (order-free)
def _draw_difference(rng):
    return {"list1": [rng.randint(1, 50) for _ in range(10)],
            "list2": [rng.randint(1, 50) for _ in range(10)]}

def _build_difference(list1, list2):
    q = f"Calculate the difference between the lists {list1} and {list2}."
    diff = tuple(x for x in _first_occurrence_unique(list1) if x not in set(list2))
    return q, IntListAnswer(diff, ordered=False)


# 45. sum of odd numbers
def _draw_sum_odds(rng):
    return {"array": _int_list(rng, 1000, 1000000, 5, 15)}

def _build_sum_odds(array):
    q = f"Sum all the odd numbers in the list {array}."
    return q, IntegerAnswer(sum(x for x in array if x % 2 == 1))


# 46. values occurring more than once (order-free)
def _draw_non_unique(rng):
    return {"array": [rng.randint(20, 35) for _ in range(20)]}

def _build_non_unique(array):
    q = f"Find out all the numbers that are not unique in the array {array}."
    repeated = tuple(v for v in _first_occurrence_unique(array) if array.count(v) > 1)
    return q, IntListAnswer(repeated, ordered=False)


# 47. flatten a square 2D list
def _draw_flatten(rng):
    n = rng.randint(2, 10)
    return {"array": [[rng.randint(1, 1000) for _ in range(n)] for _ in range(n)]}

def _build_flatten(array):
    q = f"Flatten the 2D list {array} into a 1D list."
    return q, IntListAnswer(tuple(x for row in array for x in row))


# 48. dedupe (order-free), drawn with at least one duplicate
def _draw_dedupe(rng):
    array = [rng.randint(1, 20) for _ in range(15)]
    while len(array) == len(set(array)):
        array = [rng.randint(1, 20) for _ in range(15)]
    return {"array": array}

def _build_dedupe(array):
    q = f"Remove duplicates from the list {array}."
    return q, IntListAnswer(tuple(_first_occurrence_unique(array)), ordered=False)


# 49. smallest n primes
def _draw_n_primes(rng):
    return {"n": rng.randint(5, 20)}

def _build_n_primes(n):
    return f"Generate the smallest {n} prime numbers.", IntListAnswer(tuple(first_n_primes(n)))


# 50. sum above the main diagonal
def _draw_upper_sum(rng):
    n = rng.randint(2, 10)
    return {"matrix": [[rng.randint(1000, 1000000) for _ in range(n)] for _ in range(n)]}

def _build_upper_sum(matrix):
    q = f"Find the sum of all elements above the main diagonal of the matrix {matrix}."
    n = len(matrix)
    total = sum(matrix[i][j] for i in range(n) for j in range(i + 1, n))
    return q, IntegerAnswer(total)


_Draw = Callable[[SplitMix64], dict[str, Any]]
_Build = Callable[..., tuple[str, GoldAnswer]]

_TEMPLATES: dict[int, tuple[_Draw, _Build]] = {
    1: (_draw_average, _build_average),
    2: (_draw_extreme, _build_extreme),
    3: (_draw_dot, _build_dot),
    4: (_draw_sort, _build_sort),
    5: (_draw_sum, _build_sum),
    6: (_draw_next_prime, _build_next_prime),
    7: (_draw_stddev, _build_stddev),
    8: (_draw_inverse, _build_inverse),
    9: (_draw_char_freq, _build_char_freq),
    10: (_draw_squares, _build_squares),
    11: (_draw_median, _build_median),
    12: (_draw_fibonacci, _build_fibonacci),
    13: (_draw_transpose, _build_transpose),
    14: (_draw_reverse_splice, _build_reverse_splice),
    15: (_draw_gcd, _build_gcd),
    16: (_draw_factorial, _build_factorial),
    17: (_draw_mode, _build_mode),
    18: (_draw_sum_evens, _build_sum_evens),
    19: (_draw_cumsum, _build_cumsum),
    20: (_draw_first_n, _build_first_n),
    21: (_draw_cosine, _build_cosine),
    22: (_draw_reverse_plus, _build_reverse_plus),
    23: (_draw_sum_squares, _build_sum_squares),
    24: (_draw_nth_smallest, _build_nth_smallest),
    25: (_draw_distance, _build_distance),
    26: (_draw_intersection, _build_intersection),
    27: (_draw_interest, _build_interest),
    28: (_draw_longest_word, _build_longest_word),
    29: (_draw_vowels, _build_vowels),
    30: (_draw_celsius, _build_celsius),
    31: (_draw_timezones, _build_timezones),
    32: (_draw_leap, _build_leap),
    33: (_draw_common_words, _build_common_words),
    34: (_draw_perimeter, _build_perimeter),
    35: (_draw_digit_sum, _build_digit_sum),
    36: (_draw_triangle, _build_triangle),
    37: (_draw_quadratic, _build_quadratic),
    38: (_draw_cubes, _build_cubes),
    39: (_draw_round_list, _build_round_list),
    40: (_draw_recurring, _build_recurring),
    41: (_draw_hypotenuse, _build_hypotenuse),
    42: (_draw_extract_digits, _build_extract_digits),
    43: (_draw_binary, _build_binary),
    44: (_draw_difference, _build_difference),
    45: (_draw_sum_odds, _build_sum_odds),
    46: (_draw_non_unique, _build_non_unique),
    47: (_draw_flatten, _build_flatten),
    48: (_draw_dedupe, _build_dedupe),
    49: (_draw_n_primes, _build_n_primes),
    50: (_draw_upper_sum, _build_upper_sum),
}

assert tuple(_TEMPLATES) == ALL_TEMPLATE_IDS


def build_template(template_id: int, **params: Any) -> tuple[str, GoldAnswer]:
    """Pure build with chosen parameters; the test hook for rare branches."""
    return _TEMPLATES[template_id][1](**params)


def _normalize_subset(templates: Iterable[int] | None) -> tuple[int, ...]:
    if templates is None:
        return ALL_TEMPLATE_IDS
    ids = tuple(sorted(set(templates)))
    if not ids or any(t not in _TEMPLATES for t in ids):
        raise ValueError(f"template subset must be within 1..50, got {templates!r}")
    return ids


def generate_pair(seed_trace: int, templates: Iterable[int] | None = None) -> QAPair:
    """Rebuild one pair from its trace: template chosen uniformly from the
    subset, parameters drawn from the template's ranges."""
    ids = _normalize_subset(templates)
    rng = SplitMix64(seed_trace)
    template_id = ids[rng.randint(0, len(ids) - 1)]
    draw, build = _TEMPLATES[template_id]
    question, answer = build(**draw(rng))
    return QAPair(question=question, answer=answer,
                  template_id=template_id, seed_trace=seed_trace)


def gen_randomqa(n: int, seed: int,
                 templates: Iterable[int] | None = None) -> list[QAPair]:
    """n seeded pairs, bit-for-bit reproducible for a given (n, seed,
    templates)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    ids = _normalize_subset(templates)
    master = SplitMix64(seed)
    return [generate_pair(master.next_u64(), ids) for _ in range(n)]


# --------------------------------------------------------------------------
# JSONL round-trip

def qa_to_dict(p: QAPair) -> dict[str, Any]:
    return {"question": p.question, "answer": answer_to_dict(p.answer),
            "template_id": p.template_id, "seed_trace": p.seed_trace}


def qa_from_dict(d: dict[str, Any]) -> QAPair:
    return QAPair(question=d["question"], answer=answer_from_dict(d["answer"]),
                  template_id=int(d["template_id"]), seed_trace=int(d["seed_trace"]))


def write_qa_file(fp: TextIO, pairs: Iterable[QAPair]) -> int:
    n = 0
    for p in pairs:
        fp.write(json.dumps(qa_to_dict(p), ensure_ascii=False) + "\n")
        n += 1
    return n


def read_qa_file(path: str | Path) -> list[QAPair]:
    pairs: list[QAPair] = []
    with open(path, "r", encoding="utf-8") as fp:
        for line in fp:
            line = line.strip()
            if line:
                pairs.append(qa_from_dict(json.loads(line)))
    return pairs

"""Prompt construction and command interpretation.

Two interpretation routes produce a CommandIntent:

* ``parse_response`` understands only the canonical single-line grammar
  an LLM is instructed to emit, reading fields by word index:

      move <forward|back> <D> meters at speed <V>
      rotate in direction <clockwise|counterclockwise> <A> degrees with angular speed <W>

  Move reads indices 1, 2 and 6; rotate reads 3, 4 and 9. Filler words
  are not inspected, only the arity and the indexed tokens matter.

* ``rule_based_interpret`` maps free-form English straight to an intent
  (digits only, no number words). It doubles as the offline provider
  behind the mock server and as the oracle the benchmark trusts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import Action, CommandIntent, convert_length, convert_speed


@dataclass(frozen=True)
class DefaultsConfig:
    """Values filled in when an utterance omits them."""

    distance_m: float = 1.0
    angle_deg: float = 90.0
    linear_speed: float = 0.2   # m/s
    angular_speed: float = 0.5  # rad/s

    def __post_init__(self) -> None:
        if min(self.distance_m, self.angle_deg, self.linear_speed, self.angular_speed) <= 0:
            raise ValueError(f"defaults must be positive: {self}")


@dataclass(frozen=True)
class PromptPair:
    system: str
    user: str


@dataclass(frozen=True)
class ChatExchange:
    """One completed interpretation round trip.

    The provider contract for `response_content` is a single line with
    no quotation marks and no trailing full stop; `violations()` reports
    breaches without failing the pipeline (the parser is the real gate).
    """

    system_prompt: str
    user_prompt: str
    response_content: str

    def violations(self) -> list[str]:
        problems = []
        if not self.system_prompt or not self.user_prompt:
            problems.append("empty prompt")
        if "\n" in self.response_content:
            problems.append("response spans multiple lines")
        if '"' in self.response_content:
            problems.append("response contains quotation marks")
        if self.response_content.endswith("."):
            problems.append("response ends with a full stop")
        return problems


class ResponseParseError(ValueError):
    """Canonical-grammar violation, classified by `kind`.

    Kinds: unknown-action, arity, non-numeric, negative-magnitude,
    non-positive-speed, unknown-direction.
    """

    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


class InterpretError(ValueError):
    """Rule-based interpreter could not produce an intent."""


class UninterpretableError(InterpretError):
    """No recognizable action verb in the utterance."""


class AmbiguousCommandError(InterpretError):
    """The utterance contains contradictory directions."""


_MOVE_ARITY = 7
_ROTATE_ARITY = 10

_SYSTEM_TEMPLATE = (
    "You are a command interpreter for a differential-drive mobile robot. "
    "Convert the user's instruction into exactly one line in one of these two forms:\n"
    "move <forward|back> <distance> meters at speed <speed>\n"
    "rotate in direction <clockwise|counterclockwise> <angle> degrees with angular speed <speed>\n"
    "Convert all magnitudes to standard units: distances in meters, linear speeds in m/s, "
    "angles in degrees, angular speeds in rad/s. "
    "When a value is missing, use these defaults: distance {distance} m, angle {angle} degrees, "
    "linear speed {linear} m/s, angular speed {angular} rad/s. "
    "Interpret right turns as clockwise and left turns as counterclockwise. "
    "Answer with the single formatted line only, without quotation marks and without a full stop."
)

# The mock provider recovers the raw utterance from the text after this marker.
TRANSCRIPT_MARKER = "Sentence:"

_USER_TEMPLATE = (
    "Interpret the following sentence and extract the values needed to control "
    "the robot, answering only in the required format.\n"
    f"{TRANSCRIPT_MARKER} {{transcript}}"
)


def build_prompts(transcript: str, defaults: DefaultsConfig | None = None) -> PromptPair:
    """Build the system/user prompt pair embedding `transcript` verbatim."""
    if not transcript or not transcript.strip():
        raise ValueError("transcript must be non-empty")
    defaults = defaults or DefaultsConfig()
    system = _SYSTEM_TEMPLATE.format(
        distance=defaults.distance_m,
        angle=defaults.angle_deg,
        linear=defaults.linear_speed,
        angular=defaults.angular_speed,
    )
    user = _USER_TEMPLATE.format(transcript=transcript)
    return PromptPair(system=system, user=user)


def _parse_number(token: str, field: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ResponseParseError(
            "non-numeric", f"{field} field {token!r} is not a number"
        ) from None
    if not math.isfinite(value):
        raise ResponseParseError("non-numeric", f"{field} field {token!r} is not finite")
    return value


def parse_response(content: str) -> CommandIntent:
    """Parse one canonical-grammar line into a CommandIntent.

    Accepts any string and never raises anything but ResponseParseError;
    surrounding whitespace is stripped before splitting.
    """
    if not isinstance(content, str):
        raise ResponseParseError("unknown-action", f"expected text, got {type(content).__name__}")
    words = content.strip().split()
    if not words:
        raise ResponseParseError("unknown-action", "empty response")

    if words[0] == "move":
        if len(words) != _MOVE_ARITY:
            raise ResponseParseError(
                "arity", f"move takes {_MOVE_ARITY} words, got {len(words)}"
            )
        direction = words[1]
        if direction not in ("forward", "back"):
            raise ResponseParseError(
                "unknown-direction", f"unknown move direction {direction!r}"
            )
        meters = _parse_number(words[2], "distance")
        speed = _parse_number(words[6], "speed")
        if meters < 0:
            raise ResponseParseError(
                "negative-magnitude", f"surface distance must be >= 0, got {meters}"
            )
        if speed <= 0:
            raise ResponseParseError(
                "non-positive-speed", f"speed must be > 0, got {speed}"
            )
        if direction == "back":
            meters = -meters
        return CommandIntent(Action.MOVE, meters, speed)

    if words[0] == "rotate":
        if len(words) != _ROTATE_ARITY:
            raise ResponseParseError(
                "arity", f"rotate takes {_ROTATE_ARITY} words, got {len(words)}"
            )
        direction = words[3]
        if direction not in ("clockwise", "counterclockwise"):
            raise ResponseParseError(
                "unknown-direction", f"unknown rotate direction {direction!r}"
            )
        angle = _parse_number(words[4], "angle")
        speed = _parse_number(words[9], "angular speed")
        if angle < 0:
            raise ResponseParseError(
                "negative-magnitude", f"surface angle must be >= 0, got {angle}"
            )
        if speed <= 0:
            raise ResponseParseError(
                "non-positive-speed", f"angular speed must be > 0, got {speed}"
            )
        if direction == "clockwise":
            angle = -angle
        return CommandIntent(Action.ROTATE, angle, speed)

    raise ResponseParseError("unknown-action", f"unknown leading token {words[0]!r}")


def format_intent(intent: CommandIntent) -> str:
    """Render an intent in the canonical grammar.

    Numbers use Python's float repr, so parse_response(format_intent(i))
    reproduces i exactly.
    """
    magnitude = abs(float(intent.magnitude))
    speed = float(intent.speed)
    if intent.action is Action.MOVE:
        direction = "back" if intent.magnitude < 0 else "forward"
        return f"move {direction} {magnitude!r} meters at speed {speed!r}"
    direction = "clockwise" if intent.magnitude < 0 else "counterclockwise"
    return (
        f"rotate in direction {direction} {magnitude!r} degrees "
        f"with angular speed {speed!r}"
    )


# Vocabulary for the rule-based route. Digits only; number words such as
# "two" are out of scope and simply not recognized.
_MOVE_VERBS = {"move", "go", "advance", "drive"}
_ROTATE_VERBS = {"rotate", "turn", "spin"}

_FORWARD_WORDS = {"forward", "forwards", "ahead"}
_BACKWARD_WORDS = {"back", "backward", "backwards", "reverse"}
_CLOCKWISE_WORDS = {"clockwise", "right"}
_COUNTERCLOCKWISE_WORDS = {"counterclockwise", "anticlockwise", "left"}

_LENGTH_UNITS = {
    "m": "m", "meter": "m", "meters": "m",
    "cm": "cm", "centimeter": "cm", "centimeters": "cm",
    "mm": "mm", "millimeter": "mm", "millimeters": "mm",
    "km": "km", "kilometer": "km", "kilometers": "km",
}
_ANGLE_UNITS = {"degree", "degrees", "deg", "radian", "radians", "rad"}
_RADIAN_UNITS = {"radian", "radians", "rad"}
_HOUR_WORDS = {"hour", "hr", "h"}
_SECOND_WORDS = {"second", "seconds", "sec", "s"}
_SPEED_KEYWORDS = {"speed", "velocity"}

_PUNCTUATION = ".,!?;:…"


def _tokenize(text: str) -> list[str]:
    tokens = []
    for raw in text.lower().split():
        token = raw.strip(_PUNCTUATION)
        if token:
            tokens.append(token)
    return tokens


def _as_number(token: str) -> float | None:
    try:
        value = float(token)
    except ValueError:
        return None
    return value if math.isfinite(value) else None


def _rate_unit(tokens: list[str], i: int) -> tuple[str | None, int]:
    """Classify the unit phrase starting at tokens[i].

    Returns (kind, tokens consumed): kind is one of "length", "angle",
    "linear-rate", "angular-rate", or None. "X per second/hour" spellings
    are folded into the rate kinds.
    """
    token = tokens[i]
    base = token.split("/")[0] if "/" in token else token
    per_parts = token.split("/")
    if len(per_parts) == 2:  # compact form like m/s or km/h
        num, den = per_parts
        if num in _LENGTH_UNITS and (den in _SECOND_WORDS or den in _HOUR_WORDS):
            return "linear-rate", 1
        if num in _RADIAN_UNITS and den in _SECOND_WORDS:
            return "angular-rate", 1

    follows_per = (
        i + 2 < len(tokens)
        and tokens[i + 1] == "per"
        and (tokens[i + 2] in _SECOND_WORDS or tokens[i + 2] in _HOUR_WORDS)
    )
    if base in _LENGTH_UNITS:
        if follows_per:
            return "linear-rate", 3
        return "length", 1
    if base in _ANGLE_UNITS:
        if follows_per and base in _RADIAN_UNITS:
            return "angular-rate", 3
        return "angle", 1
    return None, 1


def _linear_rate_to_mps(value: float, tokens: list[str], i: int) -> float:
    token = tokens[i]
    if "/" in token:
        num, den = token.split("/")
    else:
        num, den = token, tokens[i + 2]
    base = _LENGTH_UNITS[num]
    if den in _HOUR_WORDS:
        if base == "km":
            return convert_speed(value, "kmh")
        return convert_length(value, base) / 3600.0
    if base == "m":
        return convert_speed(value, "mps")
    if base == "cm":
        return convert_speed(value, "cmps")
    # Per-second rate of any other length unit reduces to a length ratio.
    return convert_length(value, base)


def rule_based_interpret(
    transcript: str, defaults: DefaultsConfig | None = None
) -> CommandIntent:
    """Deterministically interpret free-form English into an intent.

    Recognizes move/go/advance/drive and rotate/turn/spin verbs,
    forward/back and right/left (or explicit clockwise) directions,
    decimal magnitudes with length, angle, or rate units, and fills
    missing values from `defaults`. Raises UninterpretableError when no
    verb is found and AmbiguousCommandError on contradictory directions.
    """
    if not transcript or not transcript.strip():
        raise UninterpretableError("empty transcript")
    defaults = defaults or DefaultsConfig()
    tokens = _tokenize(transcript)

    action: Action | None = None
    for token in tokens:
        if token in _MOVE_VERBS:
            action = Action.MOVE
            break
        if token in _ROTATE_VERBS:
            action = Action.ROTATE
            break
    if action is None:
        raise UninterpretableError(f"no action verb in {transcript!r}")

    sign: float | None = None
    if action is Action.MOVE:
        positive, negative = _FORWARD_WORDS, _BACKWARD_WORDS
    else:
        positive, negative = _COUNTERCLOCKWISE_WORDS, _CLOCKWISE_WORDS
    for token in tokens:
        if token in positive:
            if sign == -1.0:
                raise AmbiguousCommandError(f"contradictory directions in {transcript!r}")
            sign = 1.0
        elif token in negative:
            if sign == 1.0:
                raise AmbiguousCommandError(f"contradictory directions in {transcript!r}")
            sign = -1.0
    if sign is None:
        sign = 1.0  # forward / counterclockwise when unstated

    magnitude: float | None = None
    speed: float | None = None
    i = 0
    while i < len(tokens):
        value = _as_number(tokens[i])
        if value is None:
            i += 1
            continue
        if i + 1 < len(tokens):
            kind, consumed = _rate_unit(tokens, i + 1)
        else:
            kind, consumed = None, 1
        if kind == "length" and action is Action.MOVE:
            if magnitude is None:
                magnitude = convert_length(value, _LENGTH_UNITS[tokens[i + 1]])
            i += 1 + consumed
        elif kind == "angle" and action is Action.ROTATE:
            if magnitude is None:
                unit = tokens[i + 1].split("/")[0]
                magnitude = math.degrees(value) if unit in _RADIAN_UNITS else value
            i += 1 + consumed
        elif kind == "linear-rate":
            if speed is None:
                speed = _linear_rate_to_mps(value, tokens, i + 1)
            i += 1 + consumed
        elif kind == "angular-rate":
            if speed is None:
                speed = value
            i += 1 + consumed
        else:
            # Bare number: a speed if a speed keyword precedes it,
            # otherwise the primary magnitude.
            if i > 0 and tokens[i - 1] in _SPEED_KEYWORDS:
                if speed is None:
                    speed = value
            elif magnitude is None:
                magnitude = value
            i += 1

    if magnitude is None:
        magnitude = defaults.distance_m if action is Action.MOVE else defaults.angle_deg
    if speed is None:
        speed = defaults.linear_speed if action is Action.MOVE else defaults.angular_speed
    if speed <= 0:
        raise InterpretError(f"non-positive speed in {transcript!r}")
    if magnitude < 0:
        # A spoken negative magnitude flips the stated direction.
        magnitude, sign = -magnitude, -sign

    return CommandIntent(action, sign * magnitude, speed)

"""Loader for the versioned prompt templates shipped with the package.

Templates are plain text with ``{{slot}}`` placeholders; using literal
replacement keeps JSON braces inside the templates inert.
"""

from importlib import resources

from .errors import ContractError

_CACHE: dict = {}


def load_prompt(name: str, **slots) -> str:
    """Read ``prompts/<name>`` and substitute the given slots."""
    if name not in _CACHE:
        ref = resources.files("fcmcodec").joinpath("prompts", name)
        _CACHE[name] = ref.read_text(encoding="utf-8")
    text = _CACHE[name]
    for key, value in slots.items():
        placeholder = "{{" + key + "}}"
        if placeholder not in text:
            raise ContractError(f"prompt {name!r} has no slot {key!r}")
        text = text.replace(placeholder, str(value))
    return text

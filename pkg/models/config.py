import hashlib
import json
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from utils.atomic_data import DEFAULT_CATALOG
from utils.errors import ConfigError


def parse_scalar(text):
    """Read a config value as int, float or string, in that order"""
    text = text.strip()
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            continue
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1]
    return text


class RunConfig(BaseModel):
    """
    Settings shared by every CLI command

    ``commands`` holds free-form parameter blocks keyed by command name;
    dotted keys in a config file (``tunneling.v0 = 8``) land there.
    """
    model_config = ConfigDict(validate_default=True, extra="forbid")

    species: str = "he3"
    catalog: Path = Path(DEFAULT_CATALOG)
    output_dir: Path = Path("output")
    seed: int = Field(default=0, ge=0)
    exclusion_hz: float = Field(default=10e9, gt=0)
    commands: dict[str, dict[str, Any]] = Field(default_factory=dict)

    @field_validator("catalog", "output_dir")
    @classmethod
    def _absolute(cls, value):
        return Path(value).expanduser().resolve()

    @classmethod
    def from_text(cls, text, **overrides):
        values, commands = {}, {}
        for number, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"config line {number} is not 'key = value'", line=raw.strip())
            key, value = (part.strip() for part in line.split("=", 1))
            if "." in key:
                command, name = key.split(".", 1)
                commands.setdefault(command, {})[name] = parse_scalar(value)
            else:
                values[key] = parse_scalar(value)
        values["commands"] = commands
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls.build(**values)

    @classmethod
    def from_file(cls, path, **overrides):
        """
        Load a ``key = value`` config file

        Args:
            path (str or Path): Config file
            **overrides: Values that win over the file (CLI flags)

        Returns:
            RunConfig: Validated config
        """
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        return cls.from_text(path.read_text(), **overrides)

    @classmethod
    def build(cls, **values):
        try:
            return cls(**values)
        except ValidationError as e:
            raise ConfigError(f"invalid config: {e.errors()[0]['loc'][0]}: {e.errors()[0]['msg']}") from e

    def block(self, command):
        return dict(self.commands.get(command, {}))

    def config_hash(self):
        """sha256 of the canonical JSON dump"""
        payload = json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    def to_dict(self):
        return self.model_dump(mode="json")

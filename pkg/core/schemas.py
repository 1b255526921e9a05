"""
tmdyn Schemas - pydantic models for the machine and configuration JSON files.

Machine:       {"alphabet": [...], "states": [...],
                "rules": [{"read", "state", "write", "next", "move"}, ...]}
Configuration: {"lo": int, "window": [...], "left_pad": [...],
                "right_pad": [...], "head": {"state", "pos"} | null}
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, Field, ValidationError

from core.errors import InputError
from core.machine import Configuration, Head, TuringMachine, make_machine


class RuleModel(BaseModel):
    read: str
    state: str
    write: str
    next: str
    move: Literal[-1, 1]


class MachineModel(BaseModel):
    alphabet: list[str] = Field(min_length=1)
    states: list[str] = Field(min_length=1)
    rules: list[RuleModel]
    name: str = ""

    def to_machine(self) -> TuringMachine:
        return make_machine(
            self.alphabet,
            self.states,
            [rule.model_dump() for rule in self.rules],
            name=self.name,
        )


class HeadModel(BaseModel):
    state: str
    pos: int


class ConfigurationModel(BaseModel):
    lo: int = 0
    window: list[str] = Field(min_length=1)
    left_pad: list[str] = Field(min_length=1)
    right_pad: list[str] = Field(min_length=1)
    head: Optional[HeadModel] = None

    def to_configuration(self) -> Configuration:
        head = Head(self.head.state, self.head.pos) if self.head else None
        return Configuration(
            self.lo, tuple(self.window), tuple(self.left_pad), tuple(self.right_pad), head
        )


def _read(path: str | Path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def machine_from_json(text: str) -> TuringMachine:
    try:
        model = MachineModel.model_validate_json(text)
    except ValidationError as exc:
        raise InputError(f"invalid machine file: {exc.errors()[0]['msg']}") from exc
    return model.to_machine()


def configuration_from_json(text: str, machine: Optional[TuringMachine] = None) -> Configuration:
    try:
        model = ConfigurationModel.model_validate_json(text)
    except ValidationError as exc:
        raise InputError(f"invalid configuration file: {exc.errors()[0]['msg']}") from exc
    config = model.to_configuration()
    if machine is not None:
        config.validate_for(machine)
    return config


def load_machine(path: str | Path) -> TuringMachine:
    machine = machine_from_json(_read(path))
    if not machine.name:
        machine = make_machine(machine.alphabet, machine.states, machine.rules, name=Path(path).stem)
    return machine


def load_configuration(path: str | Path, machine: Optional[TuringMachine] = None) -> Configuration:
    return configuration_from_json(_read(path), machine)


def configuration_to_dict(config: Configuration) -> dict:
    head = None
    if config.head is not None:
        head = {"state": config.head.state, "pos": config.head.pos}
    return {
        "lo": config.lo,
        "window": list(config.window),
        "left_pad": list(config.left_pad),
        "right_pad": list(config.right_pad),
        "head": head,
    }


def machine_to_json(machine: TuringMachine) -> str:
    data = machine.to_dict()
    if machine.name:
        data["name"] = machine.name
    return json.dumps(data, indent=2)

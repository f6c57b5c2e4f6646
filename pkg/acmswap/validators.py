# This file is a part of acmswap
# You can redistribute it and/or modify it under the terms of the GNU AGPLv3
# 🔑 https://www.gnu.org/licenses/agpl-3.0.html

import functools
import math
import typing

ConfigAllowedTypes = typing.Union[tuple, list, dict, str, int, float, bool, None]


class ValidationError(Exception):
    """
    Is being raised when config value passed can't be converted properly
    Must be raised with string, describing why value is incorrect
    It will be shown in the error output of the batch run
    """


class Validator:
    """
    Class used as validator of config value
    :param validator: Sync function, which raises `ValidationError` if passed
                      value is incorrect (with explanation) and returns converted
                      value if it is semantically correct.
                      ⚠️ If validator returns `None`, value will always be set to `None`
    :param doc: Human-readable description of accepted values, used in
                `--print-config` output
    :param _internal_id: Do not pass anything here, or things will break
    """

    def __init__(
        self,
        validator: callable,
        doc: typing.Optional[str] = None,
        _internal_id: typing.Optional[str] = None,
    ):
        self.validate = validator
        self.doc = doc or "any value"
        self.internal_id = _internal_id


class Boolean(Validator):
    """
    Any logical value to be passed
    `1`, `"1"` etc. will be automatically converted to bool
    """

    def __init__(self):
        super().__init__(self._validate, "boolean value", _internal_id="Boolean")

    @staticmethod
    def _validate(value: ConfigAllowedTypes, /) -> bool:
        true = ["True", "true", "1", 1, True, "yes", "Yes", "on", "On", "y", "Y"]
        false = ["False", "false", "0", 0, False, "no", "No", "off", "Off", "n", "N"]
        if value not in true + false:
            raise ValidationError("Passed value must be a boolean")

        return value in true


class Integer(Validator):
    """
    Checks whether passed argument is an integer value
    :param minimum: Minimal number to be passed
    :param maximum: Maximum number to be passed
    """

    def __init__(
        self,
        *,
        minimum: typing.Optional[int] = None,
        maximum: typing.Optional[int] = None,
    ):
        if minimum is not None and maximum is not None:
            doc = f"integer from {minimum} to {maximum}"
        elif minimum is not None:
            doc = f"integer not lower than {minimum}"
        elif maximum is not None:
            doc = f"integer not greater than {maximum}"
        else:
            doc = "integer"

        super().__init__(
            functools.partial(self._validate, minimum=minimum, maximum=maximum),
            doc,
            _internal_id="Integer",
        )

    @staticmethod
    def _validate(
        value: ConfigAllowedTypes,
        /,
        *,
        minimum: typing.Optional[int],
        maximum: typing.Optional[int],
    ) -> int:
        if isinstance(value, bool):
            raise ValidationError(f"Passed value ({value}) must be a number")

        if isinstance(value, float):
            if not value.is_integer():
                raise ValidationError(f"Passed value ({value}) must be an integer")

            value = int(value)

        try:
            value = int(str(value).strip())
        except ValueError:
            raise ValidationError(f"Passed value ({value}) must be a number")

        if minimum is not None and value < minimum:
            raise ValidationError(f"Passed value ({value}) is lower than minimum one")

        if maximum is not None and value > maximum:
            raise ValidationError(f"Passed value ({value}) is greater than maximum one")

        return value


class Float(Validator):
    """
    Checks whether passed argument is a finite float value
    :param minimum: Minimal number to be passed
    :param maximum: Maximum number to be passed
    :param strict: Whether `minimum` itself is rejected (for positive-only values)
    """

    def __init__(
        self,
        minimum: typing.Optional[float] = None,
        maximum: typing.Optional[float] = None,
        strict: bool = False,
    ):
        if minimum is not None:
            doc = (
                f"number greater than {minimum}"
                if strict
                else f"number not lower than {minimum}"
            )
            if maximum is not None:
                doc += f" and not greater than {maximum}"
        elif maximum is not None:
            doc = f"number not greater than {maximum}"
        else:
            doc = "number"

        super().__init__(
            functools.partial(
                self._validate,
                minimum=minimum,
                maximum=maximum,
                strict=strict,
            ),
            doc,
            _internal_id="Float",
        )

    @staticmethod
    def _validate(
        value: ConfigAllowedTypes,
        /,
        *,
        minimum: typing.Optional[float] = None,
        maximum: typing.Optional[float] = None,
        strict: bool = False,
    ) -> float:
        if isinstance(value, bool):
            raise ValidationError(f"Passed value ({value}) must be a float")

        try:
            value = float(str(value).strip().replace(",", "."))
        except ValueError:
            raise ValidationError(f"Passed value ({value}) must be a float")

        if not math.isfinite(value):
            raise ValidationError(f"Passed value ({value}) must be finite")

        if minimum is not None and (
            value < minimum or (strict and value == minimum)
        ):
            raise ValidationError(f"Passed value ({value}) is lower than minimum one")

        if maximum is not None and value > maximum:
            raise ValidationError(f"Passed value ({value}) is greater than maximum one")

        return value


class Choice(Validator):
    """
    Check whether entered value is in the allowed list
    :param possible_values: Allowed values to be passed to config param
    """

    def __init__(
        self,
        possible_values: typing.List[ConfigAllowedTypes],
        /,
    ):
        super().__init__(
            functools.partial(self._validate, possible_values=possible_values),
            "one of " + " / ".join(map(str, possible_values)),
            _internal_id="Choice",
        )

    @staticmethod
    def _validate(
        value: ConfigAllowedTypes,
        /,
        *,
        possible_values: typing.List[ConfigAllowedTypes],
    ) -> ConfigAllowedTypes:
        if value not in possible_values:
            raise ValidationError(
                f"Passed value ({value}) is not one of the following:"
                f" {' / '.join(list(map(str, possible_values)))}"
            )

        return value


class Series(Validator):
    """
    Represents the series of value (simply `list`)
    :param validator: Internal validator for each sequence value
    :param min_len: Minimal number of series items to be passed
    :param max_len: Maximum number of series items to be passed
    :param fixed_len: Fixed number of series items to be passed
    """

    def __init__(
        self,
        validator: typing.Optional[Validator] = None,
        min_len: typing.Optional[int] = None,
        max_len: typing.Optional[int] = None,
        fixed_len: typing.Optional[int] = None,
    ):
        doc = "series"
        if validator is not None:
            doc += f" of {validator.doc}"

        if fixed_len is not None:
            doc += f", exactly {fixed_len} items"
        elif min_len is not None or max_len is not None:
            upper = "any" if max_len is None else max_len
            doc += f", {min_len or 0} to {upper} items"

        super().__init__(
            functools.partial(
                self._validate,
                validator=validator,
                min_len=min_len,
                max_len=max_len,
                fixed_len=fixed_len,
            ),
            doc,
            _internal_id="Series",
        )

    @staticmethod
    def _validate(
        value: ConfigAllowedTypes,
        /,
        *,
        validator: typing.Optional[Validator] = None,
        min_len: typing.Optional[int] = None,
        max_len: typing.Optional[int] = None,
        fixed_len: typing.Optional[int] = None,
    ) -> typing.List[ConfigAllowedTypes]:
        if isinstance(value, str):
            value = [item for item in value.split(",") if item.strip()]
        elif not isinstance(value, (list, tuple)):
            value = [value]

        value = [item.strip() if isinstance(item, str) else item for item in value]

        if min_len is not None and len(value) < min_len:
            raise ValidationError(
                f"Passed value ({value}) contains less than {min_len} items"
            )

        if max_len is not None and len(value) > max_len:
            raise ValidationError(
                f"Passed value ({value}) contains more than {max_len} items"
            )

        if fixed_len is not None and len(value) != fixed_len:
            raise ValidationError(
                f"Passed value ({value}) must contain exactly {fixed_len} items"
            )

        if isinstance(validator, Validator):
            for i, item in enumerate(value):
                try:
                    value[i] = validator.validate(item)
                except ValidationError as e:
                    raise ValidationError(
                        f"Passed value ({value}) contains invalid item"
                        f" ({str(item).strip()}), which must be {validator.doc}: {e}"
                    )

        return value


class String(Validator):
    """
    Checks for length of passed value and automatically converts it to string
    :param min_len: Minimal length of string
    :param max_len: Maximum length of string
    """

    def __init__(
        self,
        min_len: typing.Optional[int] = None,
        max_len: typing.Optional[int] = None,
    ):
        super().__init__(
            functools.partial(self._validate, min_len=min_len, max_len=max_len),
            "string",
            _internal_id="String",
        )

    @staticmethod
    def _validate(
        value: ConfigAllowedTypes,
        /,
        *,
        min_len: typing.Optional[int],
        max_len: typing.Optional[int],
    ) -> str:
        if isinstance(value, (list, tuple, dict)):
            raise ValidationError(f"Passed value ({value}) must be a string")

        if isinstance(min_len, int) and len(str(value)) < min_len:
            raise ValidationError(
                f"Passed value ({value}) must be a length of at least {min_len}"
            )

        if isinstance(max_len, int) and len(str(value)) > max_len:
            raise ValidationError(
                f"Passed value ({value}) must be a length of up to {max_len}"
            )

        return str(value)


class Union(Validator):
    def __init__(self, *validators):
        super().__init__(
            functools.partial(self._validate, validators=validators),
            " or ".join(validator.doc for validator in validators),
            _internal_id="Union",
        )

    @staticmethod
    def _validate(
        value: ConfigAllowedTypes,
        /,
        *,
        validators: list,
    ) -> ConfigAllowedTypes:
        for validator in validators:
            try:
                return validator.validate(value)
            except ValidationError:
                pass

        raise ValidationError(f"Passed value ({value}) is not valid")


class NoneType(Validator):
    def __init__(self):
        super().__init__(self._validate, "empty value", _internal_id="NoneType")

    @staticmethod
    def _validate(value: ConfigAllowedTypes, /) -> None:
        if value not in (None, "", "none", "None", "null"):
            raise ValidationError(f"Passed value ({value}) is not None")

        return None


class Shape(Validator):
    """
    Seed shape of a binary-step initialization, passed as mapping:
    `{kind: rectangle, rows: [top, bottom], cols: [left, right]}` (inclusive)
    or `{kind: circle, center: [row, col], radius: r}`
    """

    def __init__(self):
        super().__init__(
            self._validate,
            "rectangle {kind, rows, cols} or circle {kind, center, radius}",
            _internal_id="Shape",
        )

    @staticmethod
    def _validate(value: ConfigAllowedTypes, /) -> dict:
        if not isinstance(value, dict):
            raise ValidationError(f"Passed value ({value}) must be a mapping")

        pair = Series(Integer(minimum=0), fixed_len=2)
        kind = value.get("kind")
        if kind == "rectangle":
            expected = {"kind", "rows", "cols"}
        elif kind == "circle":
            expected = {"kind", "center", "radius"}
        else:
            raise ValidationError(
                f"Shape kind ({kind}) is not one of the following: rectangle / circle"
            )

        if unknown := set(value) - expected:
            raise ValidationError(
                f"Shape {kind} got unknown keys: {', '.join(sorted(map(str, unknown)))}"
            )

        if missing := expected - set(value):
            raise ValidationError(
                f"Shape {kind} misses keys: {', '.join(sorted(missing))}"
            )

        if kind == "rectangle":
            rows, cols = pair.validate(value["rows"]), pair.validate(value["cols"])
            if rows[0] > rows[1] or cols[0] > cols[1]:
                raise ValidationError(
                    f"Rectangle ranges must be ascending, got rows={rows} cols={cols}"
                )

            return {"kind": kind, "rows": rows, "cols": cols}

        return {
            "kind": kind,
            "center": pair.validate(value["center"]),
            "radius": Float(minimum=0, strict=True).validate(value["radius"]),
        }


class ShapeList(Series):
    """Series of seed shapes, a single mapping is accepted as one-item list"""

    def __init__(self, min_len: typing.Optional[int] = None):
        super().__init__(Shape(), min_len=min_len)
        self.internal_id = "ShapeList"


class Mapping(Validator):
    """
    Mapping with a fixed set of keys, each checked by its own validator
    :param schema: Key → validator of its value
    :param required: Keys which must be present
    """

    def __init__(
        self,
        schema: typing.Dict[str, Validator],
        required: typing.Iterable[str] = (),
    ):
        super().__init__(
            functools.partial(
                self._validate,
                schema=schema,
                required=tuple(required),
            ),
            "mapping with keys " + ", ".join(schema),
            _internal_id="Mapping",
        )

    @staticmethod
    def _validate(
        value: ConfigAllowedTypes,
        /,
        *,
        schema: typing.Dict[str, Validator],
        required: typing.Tuple[str, ...],
    ) -> dict:
        if not isinstance(value, dict):
            raise ValidationError(f"Passed value ({value}) must be a mapping")

        if unknown := [key for key in value if key not in schema]:
            raise ValidationError(
                f"Unknown keys: {', '.join(map(str, unknown))}. Allowed:"
                f" {', '.join(schema)}"
            )

        if missing := [key for key in required if key not in value]:
            raise ValidationError(f"Missing keys: {', '.join(missing)}")

        result = {}
        for key, item in value.items():
            try:
                result[key] = schema[key].validate(item)
            except ValidationError as e:
                raise ValidationError(f"{key}: {e}")

        return result

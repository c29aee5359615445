"""
click parameter callbacks for the simulation commands.

Each callback has the click signature (ctx, param, value) and raises
click.BadParameter, which click reports as a usage error (exit code 2).

Example usage:
    @click.option('--alpha', type=float, callback=validate_alpha)
"""
import click


def _check_alpha(value, param):
    if not 0.0 < value < 1.0:
        raise click.BadParameter(f'{value} is not in (0, 1); write 99.5% as 0.995', param=param)
    return value


def validate_alpha(ctx, param, value):
    """Confidence level strictly between 0 and 1."""
    if value is None:
        return value
    return _check_alpha(value, param)


def validate_alphas(ctx, param, value):
    """
    Comma-separated confidence levels, e.g. '0.9,0.99,0.995'.

    Returns:
        tuple: Sorted distinct levels
    """
    if value is None:
        return value
    levels = []
    for token in str(value).split(','):
        token = token.strip()
        if not token:
            continue
        try:
            levels.append(_check_alpha(float(token), param))
        except ValueError:
            raise click.BadParameter(f'{token!r} is not a number', param=param)
    if not levels:
        raise click.BadParameter('at least one confidence level is required', param=param)
    return tuple(sorted(set(levels)))


def validate_positive(ctx, param, value):
    """Integer (or float) option that must be at least 1 when given."""
    if value is not None and value < 1:
        raise click.BadParameter(f'must be at least 1, got {value}', param=param)
    return value


def validate_non_negative(ctx, param, value):
    if value is not None and value < 0:
        raise click.BadParameter(f'must be non-negative, got {value}', param=param)
    return value


def validate_positive_float(ctx, param, value):
    if value is not None and not value > 0:
        raise click.BadParameter(f'must be positive, got {value}', param=param)
    return value

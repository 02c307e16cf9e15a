/**
 * Verbatim rendering of service values.
 *
 * The studio's contract is that every displayed number equals the service
 * response, so display strings are produced by JSON serialization of the
 * raw value — never by arithmetic, rounding, or reformatting.
 */

export function verbatim(value: unknown): string {
  if (value === null || value === undefined) {
    return '—';
  }
  if (typeof value === 'boolean') {
    return value ? 'yes' : 'no';
  }
  if (typeof value === 'string') {
    return value;
  }
  return JSON.stringify(value);
}

/**
 * Control bounds lifted from GET /api/schema.
 *
 * Sliders and selects take their limits from the service's own request
 * schema rather than from constants baked into the client, so the two sides
 * cannot drift. Handles the JSON-schema shapes the service emits: direct
 * $ref with sibling keys, anyOf with a null branch, and allOf wrappers.
 */

export type Bounds = {
  min: number | null;
  max: number | null;
  exclusiveMin: boolean;
  integer: boolean;
};

export function resolveNode(root: any, node: any): any {
  if (node == null || typeof node !== 'object') return node;
  if (typeof node.$ref === 'string') {
    const name = node.$ref.replace('#/$defs/', '');
    const target = root.$defs?.[name];
    if (target === undefined) throw new Error(`unresolvable $ref ${node.$ref}`);
    return { ...target, ...stripRef(node) };
  }
  if (Array.isArray(node.allOf) && node.allOf.length === 1) {
    return resolveNode(root, { ...node.allOf[0], ...stripAllOf(node) });
  }
  if (Array.isArray(node.anyOf)) {
    const branch = node.anyOf.find((b: any) => b.type !== 'null');
    if (branch) return resolveNode(root, { ...branch, ...stripAnyOf(node) });
  }
  return node;
}

const stripRef = ({ $ref, ...rest }: any) => rest;
const stripAllOf = ({ allOf, ...rest }: any) => rest;
const stripAnyOf = ({ anyOf, ...rest }: any) => rest;

/** Walk properties by name from a request schema root, resolving refs. */
export function fieldSpec(root: any, path: string[]): any {
  let node = resolveNode(root, root);
  for (const key of path) {
    const props = node.properties;
    if (!props || props[key] === undefined) {
      throw new Error(`schema has no field ${path.join('.')}`);
    }
    node = resolveNode(root, props[key]);
  }
  return node;
}

export function boundsOf(node: any): Bounds {
  const min = node.minimum ?? node.exclusiveMinimum ?? null;
  return {
    min: min === null ? null : Number(min),
    max: node.maximum === undefined ? null : Number(node.maximum),
    exclusiveMin: node.exclusiveMinimum !== undefined,
    integer: node.type === 'integer',
  };
}

export function choicesOf(node: any): string[] | null {
  if (Array.isArray(node.enum)) return node.enum.map(String);
  if (node.items && Array.isArray(node.items.enum)) return node.items.enum.map(String);
  return null;
}

export function defaultOf(root: any, path: string[]): unknown {
  let node = resolveNode(root, root);
  let value: unknown;
  for (const key of path) {
    const props = node.properties;
    if (!props || props[key] === undefined) return undefined;
    const raw = props[key];
    value = raw.default;
    node = resolveNode(root, raw);
    if (node.default !== undefined) value = node.default;
  }
  return value;
}

export function requiredOf(root: any): string[] {
  return Array.isArray(root.required) ? root.required.map(String) : [];
}

/** Apply schema bounds to a numeric input element. */
export function applyBounds(input: HTMLInputElement, bounds: Bounds, step: number): void {
  if (bounds.min !== null) {
    input.min = String(bounds.exclusiveMin ? bounds.min + step : bounds.min);
  }
  if (bounds.max !== null) input.max = String(bounds.max);
  input.step = String(bounds.integer ? Math.max(1, Math.round(step)) : step);
}

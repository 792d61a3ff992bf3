export function exported(a, b) {}
export default function defaultExport(config) {}
export const exportedArrow = (x) => x;
export async function exportedAsync() {}

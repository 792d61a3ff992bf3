function fromObject({ title, start }, calendar) {}
const fromArray = ([first, second], fallback) => first || fallback;

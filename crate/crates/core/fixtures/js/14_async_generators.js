async function loadSongs(url) {}
function* range(start, end) {}
async function* stream(source) {}
const later = async () => {};

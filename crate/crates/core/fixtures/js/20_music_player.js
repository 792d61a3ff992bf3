// Amplitude-style player controls.
const songs = [];

function playSong(songName) {
  const index = songs.findIndex((s) => s.name === songName);
  Amplitude.playSongAtIndex(index);
}

function addToPlaylist(songs) {
  songs.forEach((s) => playlist.push(s));
}

const setVolume = (level) => {
  Amplitude.setVolume(Number(level));
};

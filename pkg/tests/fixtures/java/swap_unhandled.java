import java.util.Vector;

public class VectorSwap {
    public static void swap(Vector<Integer> v, int i, int j) {
        int first = v.get(i);
        int second = v.get(j);
        v.set(i, second);
        v.set(j, first);
    }
}
